use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pairwise and partition agreement between predicted clusters and planted
/// campaigns. Noise and filler posts count as singletons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_posts: usize,
    pub n_planted_posts: usize,
    pub n_planted_campaigns: usize,
    pub n_predicted_clusters: usize,
    /// Predicted clusters minus planted campaigns.
    pub cluster_count_delta: i64,
    /// Planted posts inside the cluster that best represents their campaign.
    pub n_correct: usize,
    pub n_misclassified: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ari: f64,
}

fn pairs(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Scores `groups` (predicted clusters of two or more posts) against
/// `truth`, which must contain every predicted post; posts in `truth`
/// outside every group are treated as noise.
///
/// A campaign's posts are correct when the predicted cluster holding most of
/// them also has that campaign as its own majority; all other planted posts
/// are misclassified.
pub fn evaluate_groups<S: AsRef<str>>(
    groups: &[Vec<S>],
    truth: &BTreeMap<String, Option<String>>,
) -> Result<EvalReport> {
    let campaign_ids: Vec<&str> = {
        let mut v: Vec<&str> = truth.values().flatten().map(String::as_str).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let campaign_index: HashMap<&str, usize> = campaign_ids
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();

    let mut campaign_sizes = vec![0usize; campaign_ids.len()];
    for c in truth.values().flatten() {
        campaign_sizes[campaign_index[c.as_str()]] += 1;
    }

    // contingency[(cluster, campaign)]
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut cluster_sizes = Vec::with_capacity(groups.len());
    for (g, members) in groups.iter().enumerate() {
        cluster_sizes.push(members.len());
        for m in members {
            let m = m.as_ref();
            let label = truth.get(m).ok_or_else(|| {
                Error::InvalidArgument(format!("predicted post {m} missing from ground truth"))
            })?;
            if seen.insert(m, g).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "post {m} appears in two predicted clusters"
                )));
            }
            if let Some(c) = label {
                *table.entry((g, campaign_index[c.as_str()])).or_default() += 1;
            }
        }
    }

    let tp: f64 = table.values().map(|&n| pairs(n)).sum();
    let pred_pairs: f64 = cluster_sizes.iter().map(|&n| pairs(n)).sum();
    let true_pairs: f64 = campaign_sizes.iter().map(|&n| pairs(n)).sum();
    let precision = if pred_pairs > 0.0 {
        tp / pred_pairs
    } else {
        1.0
    };
    let recall = if true_pairs > 0.0 {
        tp / true_pairs
    } else {
        1.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };

    let total = pairs(truth.len());
    let expected = if total > 0.0 {
        pred_pairs * true_pairs / total
    } else {
        0.0
    };
    let max = (pred_pairs + true_pairs) / 2.0;
    let ari = if max - expected == 0.0 {
        if tp == pred_pairs && tp == true_pairs {
            1.0
        } else {
            0.0
        }
    } else {
        (tp - expected) / (max - expected)
    };

    // Best cluster per campaign and majority campaign per cluster; ties go
    // to the lower index.
    let mut best_cluster: Vec<Option<(usize, usize)>> = vec![None; campaign_ids.len()];
    let mut majority: HashMap<usize, (usize, usize)> = HashMap::new();
    for (&(g, c), &n) in &table {
        match best_cluster[c] {
            Some((_, best)) if best >= n => {}
            _ => best_cluster[c] = Some((g, n)),
        }
        match majority.get(&g) {
            Some(&(_, best)) if best >= n => {}
            _ => {
                majority.insert(g, (c, n));
            }
        }
    }
    let n_correct: usize = best_cluster
        .iter()
        .enumerate()
        .filter_map(|(c, b)| b.filter(|&(g, _)| majority[&g].0 == c).map(|(_, n)| n))
        .sum();
    let n_planted_posts: usize = campaign_sizes.iter().sum();

    Ok(EvalReport {
        n_posts: truth.len(),
        n_planted_posts,
        n_planted_campaigns: campaign_ids.len(),
        n_predicted_clusters: groups.len(),
        cluster_count_delta: groups.len() as i64 - campaign_ids.len() as i64,
        n_correct,
        n_misclassified: n_planted_posts - n_correct,
        precision,
        recall,
        f1,
        ari,
    })
}
