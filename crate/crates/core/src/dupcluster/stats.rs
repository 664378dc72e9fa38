use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ClusterSet;
use crate::{Error, Result};

/// Cluster size statistics and the duplicate counts used to compare
/// detectors (posts, post pairs, accounts, account pairs).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_clusters: usize,
    pub mean_size: f64,
    /// Population standard deviation.
    pub sd_size: f64,
    pub max_size: usize,
    pub k: usize,
    pub n_ge_k: usize,
    pub total_clustered_posts: usize,
    pub n_noise: usize,
    /// Σ C(size, 2) over clusters.
    pub post_pairs: u64,
    pub distinct_accounts: Option<usize>,
    /// Distinct unordered pairs of different accounts sharing a cluster.
    pub account_pairs: Option<u64>,
}

/// `post_accounts` (post id to account id) enables the account counts.
pub fn cluster_stats(
    clusters: &ClusterSet,
    k: usize,
    post_accounts: Option<&HashMap<String, String>>,
) -> Result<StatsReport> {
    let sizes: Vec<usize> = clusters.clusters.iter().map(|c| c.size()).collect();
    let n = sizes.len();
    let total: usize = sizes.iter().sum();
    let mean = if n > 0 { total as f64 / n as f64 } else { 0.0 };
    let var = if n > 0 {
        sizes
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64
    } else {
        0.0
    };

    let mut report = StatsReport {
        n_clusters: n,
        mean_size: mean,
        sd_size: var.sqrt(),
        max_size: sizes.iter().copied().max().unwrap_or(0),
        k,
        n_ge_k: sizes.iter().filter(|&&s| s >= k).count(),
        total_clustered_posts: total,
        n_noise: clusters.noise.len(),
        post_pairs: sizes
            .iter()
            .map(|&s| (s * s.saturating_sub(1) / 2) as u64)
            .sum(),
        distinct_accounts: None,
        account_pairs: None,
    };

    if let Some(map) = post_accounts {
        let mut intern: HashMap<&str, u32> = HashMap::new();
        let mut pairs: HashSet<(u32, u32)> = HashSet::new();
        for c in &clusters.clusters {
            let mut accts = BTreeSet::new();
            for m in &c.members {
                let a = map.get(m).ok_or_else(|| Error::MissingAccount(m.clone()))?;
                let next = intern.len() as u32;
                accts.insert(*intern.entry(a.as_str()).or_insert(next));
            }
            let accts: Vec<u32> = accts.into_iter().collect();
            for (i, &a) in accts.iter().enumerate() {
                for &b in &accts[i + 1..] {
                    pairs.insert((a, b));
                }
            }
        }
        report.distinct_accounts = Some(intern.len());
        report.account_pairs = Some(pairs.len() as u64);
    }
    Ok(report)
}
