use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DuplicationGraph, Partition};
use crate::corpus::{AccountCollection, Party};
use crate::{Error, Result};

pub const MIXED: &str = "mixed";
pub const UNAFFILIATED: &str = "unaffiliated";
pub const UNLABELED: &str = "unlabeled";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedMember {
    pub account_id: String,
    pub degree: usize,
    pub strength: f64,
    pub party: Option<Party>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityProfile {
    pub community_id: usize,
    pub size: usize,
    pub dominant_party: String,
    /// Per party plus `unlabeled`.
    pub party_counts: BTreeMap<String, usize>,
    /// By degree, then strength, both descending, then id.
    pub members: Vec<RankedMember>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub q: f64,
    pub n_communities: usize,
    pub n_nodes: usize,
    pub min_size: usize,
    /// Communities with at least `min_size` members.
    pub n_profiled: usize,
    pub accounts_in_profiled: usize,
    pub share_in_profiled: f64,
    /// Largest first; ties by community id.
    pub communities: Vec<CommunityProfile>,
}

/// Plurality of labeled members; `mixed` when the runner-up has at least
/// 90% of the leader's count, `unaffiliated` without labels.
pub fn dominant_party(counts: &BTreeMap<Party, usize>) -> String {
    let mut ranked: Vec<(Party, usize)> = counts
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(&p, &n)| (p, n))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    match ranked.as_slice() {
        [] => UNAFFILIATED.to_string(),
        [(p, _)] => p.as_str().to_string(),
        [(p, top), (_, second), ..] => {
            if *second as f64 >= 0.9 * *top as f64 {
                MIXED.to_string()
            } else {
                p.as_str().to_string()
            }
        }
    }
}

pub fn community_profile(
    graph: &DuplicationGraph,
    partition: &Partition,
    accounts: &AccountCollection,
    min_size: usize,
) -> Result<ProfileReport> {
    if partition.nodes != graph.nodes {
        return Err(Error::InvalidArgument(
            "partition does not match graph nodes".into(),
        ));
    }
    let degrees = graph.degrees();
    let strengths = graph.strengths();
    let mut communities: Vec<CommunityProfile> = partition
        .members()
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.len() >= min_size.max(1))
        .map(|(cid, idx)| {
            let mut counts: BTreeMap<Party, usize> = BTreeMap::new();
            let mut unlabeled = 0;
            let mut members: Vec<RankedMember> = idx
                .iter()
                .map(|&i| {
                    let party = accounts.party_of(&graph.nodes[i]);
                    match party {
                        Some(p) => *counts.entry(p).or_default() += 1,
                        None => unlabeled += 1,
                    }
                    RankedMember {
                        account_id: graph.nodes[i].clone(),
                        degree: degrees[i],
                        strength: strengths[i],
                        party,
                    }
                })
                .collect();
            members.sort_by(|a, b| {
                b.degree
                    .cmp(&a.degree)
                    .then(b.strength.total_cmp(&a.strength))
                    .then(a.account_id.cmp(&b.account_id))
            });
            let mut party_counts: BTreeMap<String, usize> = Party::ALL
                .iter()
                .map(|p| (p.as_str().to_string(), counts.get(p).copied().unwrap_or(0)))
                .collect();
            party_counts.insert(UNLABELED.to_string(), unlabeled);
            CommunityProfile {
                community_id: cid,
                size: idx.len(),
                dominant_party: dominant_party(&counts),
                party_counts,
                members,
            }
        })
        .collect();
    communities.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then(a.community_id.cmp(&b.community_id))
    });
    let in_profiled: usize = communities.iter().map(|c| c.size).sum();
    let n = graph.n_nodes();
    Ok(ProfileReport {
        q: partition.q,
        n_communities: partition.n_communities,
        n_nodes: n,
        min_size,
        n_profiled: communities.len(),
        accounts_in_profiled: in_profiled,
        share_in_profiled: if n > 0 {
            in_profiled as f64 / n as f64
        } else {
            0.0
        },
        communities,
    })
}

/// Node table for graph-visualization tools: `id,degree,community,party`.
pub fn write_layout_csv(
    path: &Path,
    graph: &DuplicationGraph,
    partition: &Partition,
    accounts: &AccountCollection,
) -> Result<()> {
    let degrees = graph.degrees();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["id", "degree", "community", "party"])?;
    for (i, id) in graph.nodes.iter().enumerate() {
        let party = accounts.party_of(id).map_or("", Party::as_str);
        w.write_record([
            id.as_str(),
            &degrees[i].to_string(),
            &partition.assignment[i].to_string(),
            party,
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
