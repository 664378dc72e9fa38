//! Duplication clusters: exact DBSCAN over embeddings, consistency checks,
//! summary statistics and the eps sweep.

mod consistency;
mod search;
mod stats;
mod sweep;

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::PostCollection;
use crate::embed::EmbeddingSet;
use crate::{Error, Execution, Result};

pub use consistency::{consistency, ClusterConsistency, ConsistencyConfig, ConsistencyReport};
pub use stats::{cluster_stats, StatsReport};
pub use sweep::{eps_sweep, parse_eps_range, SweepReport, SweepRow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            min_pts: 2,
        }
    }
}

impl ClusterParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if min_pts < 2 {
            return Err(Error::InvalidArgument(format!(
                "min_pts must be >= 2, got {min_pts}"
            )));
        }
        Ok(Self { eps, min_pts })
    }
}

/// Raw DBSCAN output over the embedded posts, in ascending post-id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub ids: Vec<String>,
    /// Cluster index per post; `None` is noise.
    pub labels: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub n_clusters: usize,
}

impl Assignment {
    /// Members per cluster, each list in ascending id order.
    pub fn groups(&self) -> Vec<Vec<&str>> {
        let mut groups = vec![Vec::new(); self.n_clusters];
        for (id, label) in self.ids.iter().zip(&self.labels) {
            if let Some(c) = label {
                groups[*c].push(id.as_str());
            }
        }
        groups
    }
}

/// DBSCAN with exact neighbor search.
///
/// A point is core when at least `min_pts` points, itself included, lie
/// within `eps`. Points are visited in ascending post-id order; each
/// unvisited core point starts a cluster that is expanded breadth-first, and
/// a border point joins the first cluster that reaches it. Non-core points
/// reached by no cluster are noise.
///
/// `eps` may be zero here (used by sweeps); [`ClusterParams`] requires it
/// to be positive.
pub fn dbscan_assign(set: &EmbeddingSet, eps: f64, min_pts: usize, exec: Execution) -> Assignment {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| set.ids()[a].cmp(&set.ids()[b]));
    let n = order.len();
    let graph = search::neighbor_graph(set, &order, eps, exec);

    let core: Vec<bool> = (0..n).map(|i| graph.degree(i) + 1 >= min_pts).collect();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut n_clusters = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if labels[start].is_some() || !core[start] {
            continue;
        }
        let c = n_clusters;
        n_clusters += 1;
        labels[start] = Some(c);
        queue.push_back(start);
        while let Some(q) = queue.pop_front() {
            for &r in graph.neighbors(q) {
                let r = r as usize;
                if labels[r].is_none() {
                    labels[r] = Some(c);
                    if core[r] {
                        queue.push_back(r);
                    }
                }
            }
        }
    }

    Assignment {
        ids: order.iter().map(|&i| set.ids()[i].clone()).collect(),
        labels,
        core,
        n_clusters,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    /// Ascending post ids; at least two.
    pub members: Vec<String>,
    pub first_ts: DateTime<Utc>,
    pub last_ts: DateTime<Utc>,
    pub active_span_seconds: i64,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Clusters plus noise; together they partition the clustered posts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<String>,
}

impl ClusterSet {
    /// Builds clusters from member lists. Ids are renumbered `0..` in the
    /// given order; timestamps come from `posts`.
    pub fn from_groups<S: AsRef<str>>(
        groups: Vec<Vec<S>>,
        noise: Vec<String>,
        posts: &PostCollection,
    ) -> Result<Self> {
        let mut clusters = Vec::with_capacity(groups.len());
        for group in groups {
            let mut members: Vec<String> = group.iter().map(|s| s.as_ref().to_string()).collect();
            members.sort();
            if members.len() < 2 {
                return Err(Error::InvalidArgument(
                    "cluster with fewer than two members".into(),
                ));
            }
            let mut first: Option<DateTime<Utc>> = None;
            let mut last: Option<DateTime<Utc>> = None;
            for id in &members {
                let ts = posts
                    .get(id)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("clustered post {id} not in corpus"))
                    })?
                    .timestamp;
                first = Some(first.map_or(ts, |f| f.min(ts)));
                last = Some(last.map_or(ts, |l| l.max(ts)));
            }
            let (first_ts, last_ts) = (first.unwrap(), last.unwrap());
            clusters.push(Cluster {
                cluster_id: clusters.len(),
                members,
                first_ts,
                last_ts,
                active_span_seconds: (last_ts - first_ts).num_seconds(),
            });
        }
        let mut noise = noise;
        noise.sort();
        Ok(Self { clusters, noise })
    }

    pub fn from_assignment(a: &Assignment, posts: &PostCollection) -> Result<Self> {
        let noise = a
            .ids
            .iter()
            .zip(&a.labels)
            .filter(|(_, l)| l.is_none())
            .map(|(id, _)| id.clone())
            .collect();
        Self::from_groups(a.groups(), noise, posts)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n_clustered_posts(&self) -> usize {
        self.clusters.iter().map(Cluster::size).sum()
    }

    /// Post id to cluster id, noise included as `None`.
    pub fn labels(&self) -> HashMap<&str, Option<usize>> {
        let mut out: HashMap<&str, Option<usize>> =
            self.noise.iter().map(|id| (id.as_str(), None)).collect();
        for c in &self.clusters {
            for m in &c.members {
                out.insert(m.as_str(), Some(c.cluster_id));
            }
        }
        out
    }
}

/// Runs [`dbscan_assign`] and attaches post timestamps.
pub fn dbscan(
    set: &EmbeddingSet,
    params: &ClusterParams,
    posts: &PostCollection,
    exec: Execution,
) -> Result<ClusterSet> {
    let a = dbscan_assign(set, params.eps, params.min_pts, exec);
    ClusterSet::from_assignment(&a, posts)
}

/// `post_id,cluster_id` rows in ascending post-id order, noise as −1.
pub fn write_clusters_csv(path: &Path, clusters: &ClusterSet) -> Result<()> {
    let mut rows: Vec<(&str, i64)> = clusters.noise.iter().map(|id| (id.as_str(), -1)).collect();
    for c in &clusters.clusters {
        rows.extend(c.members.iter().map(|m| (m.as_str(), c.cluster_id as i64)));
    }
    rows.sort();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["post_id", "cluster_id"])?;
    for (id, c) in rows {
        w.write_record([id, &c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_clusters_csv(path: &Path, posts: &PostCollection) -> Result<ClusterSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut groups: std::collections::BTreeMap<i64, Vec<String>> = Default::default();
    let mut noise = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(id), Some(c)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::format(path, "expected post_id,cluster_id"));
        };
        let c: i64 = c
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("bad cluster id {c:?}")))?;
        if c < 0 {
            noise.push(id.to_string());
        } else {
            groups.entry(c).or_default().push(id.to_string());
        }
    }
    let mut set = ClusterSet::from_groups(groups.values().cloned().collect(), noise, posts)?;
    for (c, id) in set.clusters.iter_mut().zip(groups.keys()) {
        c.cluster_id = *id as usize;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{timestamp_format, Post};

    fn set_of(points: &[&[f64]]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new(points[0].len()).unwrap();
        for (i, p) in points.iter().enumerate() {
            s.push(format!("p{i}"), p).unwrap();
        }
        s
    }

    fn posts(n: usize) -> PostCollection {
        PostCollection::new(
            (0..n)
                .map(|i| Post {
                    id: format!("p{i}"),
                    account_id: format!("a{}", i % 3),
                    timestamp: timestamp_format::parse("2023-01-01T00:00:00Z").unwrap()
                        + chrono::Duration::seconds(60 * i as i64),
                    text: String::new(),
                    urls: vec![],
                    is_retweet: false,
                    lang: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_point_is_noise() {
        let s = set_of(&[&[0.0, 0.0]]);
        let a = dbscan_assign(&s, 1.0, 2, Execution::Sequential);
        assert_eq!(a.n_clusters, 0);
        assert_eq!(a.labels, vec![None]);
    }

    #[test]
    fn pair_within_eps() {
        let s = set_of(&[&[0.0, 0.0], &[0.5, 0.0]]);
        let a = dbscan_assign(&s, 1.0, 2, Execution::Sequential);
        assert_eq!(a.n_clusters, 1);
        assert_eq!(a.labels, vec![Some(0), Some(0)]);
    }

    #[test]
    fn chaining() {
        let s = set_of(&[&[-0.9], &[0.0], &[0.9]]);
        let a = dbscan_assign(&s, 1.0, 2, Execution::Sequential);
        assert_eq!(a.n_clusters, 1);
        assert!(a.labels.iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn border_goes_to_first_cluster() {
        let s = set_of(&[
            &[-0.8],
            &[-0.7],
            &[-0.6],
            &[-0.5],
            &[0.5],
            &[0.6],
            &[0.7],
            &[0.8],
            &[0.0],
        ]);
        let a = dbscan_assign(&s, 0.55, 4, Execution::Sequential);
        let lab: HashMap<_, _> = a.ids.iter().cloned().zip(a.labels.clone()).collect();
        assert_eq!(a.n_clusters, 2);
        assert_eq!(lab["p8"], Some(0));
        assert_eq!(lab["p4"], Some(1));
        assert!(!a.core[a.ids.iter().position(|x| x == "p8").unwrap()]);
    }

    #[test]
    fn cluster_set_spans_and_csv() {
        let s = set_of(&[&[-0.5], &[-0.4], &[1.0], &[-0.3]]);
        let p = posts(4);
        let cs = dbscan(&s, &ClusterParams::default(), &p, Execution::Sequential).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.clusters[0].members, ["p0", "p1", "p3"]);
        assert_eq!(cs.clusters[0].active_span_seconds, 180);
        assert_eq!(cs.noise, ["p2"]);

        let f = tempfile::NamedTempFile::new().unwrap();
        write_clusters_csv(f.path(), &cs).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "post_id,cluster_id\np0,0\np1,0\np2,-1\np3,0\n");
        assert_eq!(read_clusters_csv(f.path(), &p).unwrap(), cs);
    }

    #[test]
    fn params_validation() {
        assert!(ClusterParams::new(0.0, 2).is_err());
        assert!(ClusterParams::new(1.0, 1).is_err());
        assert!(ClusterParams::new(1.0, 2).is_ok());
    }

    #[test]
    fn empty_input() {
        let s = EmbeddingSet::new(4).unwrap();
        let a = dbscan_assign(&s, 1.0, 2, Execution::Parallel);
        assert_eq!(a.n_clusters, 0);
        assert!(a.ids.is_empty());
    }
}
