use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dbscan_assign;
use crate::embed::EmbeddingSet;
use crate::synth::evaluate_groups;
use crate::{Error, Execution, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n_clusters: usize,
    pub n_correct: usize,
    pub n_misclassified: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ari: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub min_pts: usize,
    pub n_planted_campaigns: usize,
    pub n_planted_posts: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Row with the highest ARI; the smallest eps wins ties.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.ari >= r.ari => Some(b),
                _ => Some(r),
            })
    }
}

/// Parses `lo:hi:step` (inclusive) or a comma-separated list.
pub fn parse_eps_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad eps range {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, step] => {
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            let step: f64 = step.trim().parse().map_err(|_| bad())?;
            if !(step > 0.0 && hi >= lo && lo >= 0.0) {
                return Err(bad());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..n)
                .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
                .collect()
        }
        [_] => spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(bad());
    }
    Ok(values)
}

/// Clusters at every eps and scores each run against planted campaigns.
///
/// `truth` maps every embedded post id to its campaign, or `None` for
/// filler.
pub fn eps_sweep(
    set: &EmbeddingSet,
    truth: &BTreeMap<String, Option<String>>,
    eps_values: &[f64],
    min_pts: usize,
    exec: Execution,
) -> Result<SweepReport> {
    if eps_values.is_empty() {
        return Err(Error::InvalidArgument(
            "eps sweep needs at least one value".into(),
        ));
    }
    if let Some(id) = set.ids().iter().find(|id| !truth.contains_key(*id)) {
        return Err(Error::InvalidArgument(format!(
            "post {id} missing from ground truth"
        )));
    }
    let embedded: BTreeMap<String, Option<String>> = set
        .ids()
        .iter()
        .map(|id| (id.clone(), truth[id].clone()))
        .collect();

    let mut report = SweepReport {
        min_pts,
        ..Default::default()
    };
    for &eps in eps_values {
        let a = dbscan_assign(set, eps, min_pts, exec);
        let eval = evaluate_groups(&a.groups(), &embedded)?;
        report.n_planted_campaigns = eval.n_planted_campaigns;
        report.n_planted_posts = eval.n_planted_posts;
        report.rows.push(SweepRow {
            eps,
            n_clusters: a.n_clusters,
            n_correct: eval.n_correct,
            n_misclassified: eval.n_misclassified,
            precision: eval.precision,
            recall: eval.recall,
            f1: eval.f1,
            ari: eval.ari,
        });
    }
    Ok(report)
}
