use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClusterSet;
use crate::embed::{cosine, EmbeddingSet};
use crate::{Error, Execution, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    /// Clusters up to this size are checked over all pairs.
    pub exact_cap: usize,
    /// Pairs drawn from each cluster above the cap.
    pub sample_pairs: usize,
    pub seed: u64,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self {
            exact_cap: 1000,
            sample_pairs: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConsistency {
    pub cluster_id: usize,
    pub size: usize,
    pub min_cosine: Option<f64>,
    pub mean_cosine: Option<f64>,
    pub n_pairs: u64,
    pub sampled: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Minimum over all evaluated within-cluster pairs.
    pub min_cosine: Option<f64>,
    /// Mean over all evaluated within-cluster pairs.
    pub mean_cosine: Option<f64>,
    pub n_pairs: u64,
    pub n_sampled_clusters: usize,
    /// Pairs skipped because a member vector has zero norm.
    pub n_undefined_pairs: u64,
    pub clusters: Vec<ClusterConsistency>,
}

struct Acc {
    min: f64,
    sum: f64,
    n: u64,
    undefined: u64,
}

impl Acc {
    fn add(&mut self, u: &[f64], v: &[f64]) {
        match cosine(u, v) {
            Ok(c) => {
                self.min = self.min.min(c);
                self.sum += c;
                self.n += 1;
            }
            Err(_) => self.undefined += 1,
        }
    }
}

/// Within-cluster cosine similarity: exact over all pairs up to
/// `exact_cap` members, seeded pair sampling above it.
pub fn consistency(
    clusters: &ClusterSet,
    set: &EmbeddingSet,
    cfg: &ConsistencyConfig,
    exec: Execution,
) -> Result<ConsistencyReport> {
    let per: Vec<Result<(ClusterConsistency, Acc)>> = exec.map(&clusters.clusters, |c| {
        let rows: Vec<&[f64]> = c
            .members
            .iter()
            .map(|m| {
                set.get(m).ok_or_else(|| {
                    Error::InvalidArgument(format!("cluster member {m} has no embedding"))
                })
            })
            .collect::<Result<_>>()?;
        let mut acc = Acc {
            min: f64::INFINITY,
            sum: 0.0,
            n: 0,
            undefined: 0,
        };
        let sampled = rows.len() > cfg.exact_cap;
        if sampled {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c.cluster_id as u64);
            for _ in 0..cfg.sample_pairs {
                let i = rng.random_range(0..rows.len());
                let mut j = rng.random_range(0..rows.len() - 1);
                if j >= i {
                    j += 1;
                }
                acc.add(rows[i], rows[j]);
            }
        } else {
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    acc.add(rows[i], rows[j]);
                }
            }
        }
        let stats = ClusterConsistency {
            cluster_id: c.cluster_id,
            size: rows.len(),
            min_cosine: (acc.n > 0).then_some(acc.min),
            mean_cosine: (acc.n > 0).then(|| acc.sum / acc.n as f64),
            n_pairs: acc.n,
            sampled,
        };
        Ok((stats, acc))
    });

    let mut report = ConsistencyReport::default();
    let (mut min, mut sum) = (f64::INFINITY, 0.0);
    for r in per {
        let (stats, acc) = r?;
        if acc.n > 0 {
            min = min.min(acc.min);
        }
        sum += acc.sum;
        report.n_pairs += acc.n;
        report.n_undefined_pairs += acc.undefined;
        report.n_sampled_clusters += stats.sampled as usize;
        report.clusters.push(stats);
    }
    if report.n_pairs > 0 {
        report.min_cosine = Some(min);
        report.mean_cosine = Some(sum / report.n_pairs as f64);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dupcluster::Cluster;
    use chrono::{TimeZone, Utc};

    fn cluster(id: usize, members: &[&str]) -> Cluster {
        let t = Utc.timestamp_opt(0, 0).unwrap();
        Cluster {
            cluster_id: id,
            members: members.iter().map(|s| s.to_string()).collect(),
            first_ts: t,
            last_ts: t,
            active_span_seconds: 0,
        }
    }

    #[test]
    fn identical_and_orthogonal() {
        let mut set = EmbeddingSet::new(2).unwrap();
        set.push("a", &[0.6, 0.8]).unwrap();
        set.push("b", &[0.6, 0.8]).unwrap();
        set.push("c", &[1.0, 0.0]).unwrap();
        set.push("d", &[0.0, 1.0]).unwrap();
        let cs = ClusterSet {
            clusters: vec![cluster(0, &["a", "b"]), cluster(1, &["c", "d"])],
            noise: vec![],
        };
        let r = consistency(
            &cs,
            &set,
            &ConsistencyConfig::default(),
            Execution::Sequential,
        )
        .unwrap();
        assert!((r.clusters[0].min_cosine.unwrap() - 1.0).abs() < 1e-15);
        assert!((r.clusters[0].mean_cosine.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(r.clusters[1].min_cosine, Some(0.0));
        assert_eq!(r.min_cosine, Some(0.0));
        assert!((r.mean_cosine.unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(r.n_pairs, 2);
    }

    #[test]
    fn sampling_above_cap() {
        let mut set = EmbeddingSet::new(2).unwrap();
        let ids: Vec<String> = (0..30).map(|i| format!("p{i:02}")).collect();
        for (i, id) in ids.iter().enumerate() {
            let a = i as f64 * 0.01;
            set.push(id.clone(), &[a.cos(), a.sin()]).unwrap();
        }
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let cs = ClusterSet {
            clusters: vec![cluster(0, &refs)],
            noise: vec![],
        };
        let cfg = ConsistencyConfig {
            exact_cap: 10,
            sample_pairs: 500,
            seed: 3,
        };
        let r = consistency(&cs, &set, &cfg, Execution::Sequential).unwrap();
        assert!(r.clusters[0].sampled);
        assert_eq!(r.n_pairs, 500);
        assert_eq!(r.n_sampled_clusters, 1);
        let again = consistency(&cs, &set, &cfg, Execution::Parallel).unwrap();
        assert_eq!(r, again);
        let exact = consistency(
            &cs,
            &set,
            &ConsistencyConfig::default(),
            Execution::Sequential,
        )
        .unwrap();
        assert!(r.min_cosine.unwrap() >= exact.min_cosine.unwrap());
    }

    #[test]
    fn empty_set() {
        let set = EmbeddingSet::new(2).unwrap();
        let r = consistency(
            &ClusterSet::default(),
            &set,
            &ConsistencyConfig::default(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.min_cosine, None);
        assert_eq!(r.n_pairs, 0);
    }

    #[test]
    fn missing_member_is_error() {
        let set = EmbeddingSet::new(2).unwrap();
        let cs = ClusterSet {
            clusters: vec![cluster(0, &["x", "y"])],
            noise: vec![],
        };
        assert!(consistency(
            &cs,
            &set,
            &ConsistencyConfig::default(),
            Execution::Sequential
        )
        .is_err());
    }
}
