//! Account co-duplication graph: shared-cluster pair weights, thresholding,
//! Louvain communities and political profiles of those communities.

mod louvain;
mod profile;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dupcluster::ClusterSet;
use crate::{Error, Execution, Result};

pub use louvain::{louvain, modularity, modularity_of_labels, Partition};
pub use profile::{
    community_profile, dominant_party, write_layout_csv, CommunityProfile, ProfileReport,
    RankedMember, MIXED, UNAFFILIATED, UNLABELED,
};

/// How co-duplication between two accounts is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Clusters containing posts from both accounts, once per cluster.
    #[default]
    SharedClusters,
    /// Within-cluster post pairs split across the two accounts.
    SharedPostPairs,
}

/// Unordered account pairs with their co-duplication weight; keys ordered
/// `(smaller id, larger id)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWeights {
    pub weights: BTreeMap<(String, String), u64>,
}

impl PairWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }
}

/// Counts account co-occurrence across clusters.
pub fn build_pairs(
    clusters: &ClusterSet,
    post_accounts: &HashMap<String, String>,
    mode: PairMode,
    exec: Execution,
) -> Result<PairWeights> {
    let per_cluster: Vec<Result<Vec<(&str, u64)>>> = exec.map(&clusters.clusters, |c| {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for m in &c.members {
            let a = post_accounts
                .get(m)
                .ok_or_else(|| Error::MissingAccount(m.clone()))?;
            *counts.entry(a.as_str()).or_default() += 1;
        }
        Ok(counts.into_iter().collect())
    });
    let mut weights: HashMap<(&str, &str), u64> = HashMap::new();
    for accts in per_cluster {
        let accts = accts?;
        for (i, &(a, na)) in accts.iter().enumerate() {
            for &(b, nb) in &accts[i + 1..] {
                let w = match mode {
                    PairMode::SharedClusters => 1,
                    PairMode::SharedPostPairs => na * nb,
                };
                *weights.entry((a, b)).or_default() += w;
            }
        }
    }
    Ok(PairWeights {
        weights: weights
            .into_iter()
            .map(|((a, b), w)| ((a.to_string(), b.to_string()), w))
            .collect(),
    })
}

/// Undirected weighted graph without self-loops. Nodes are sorted ids;
/// edges are `(u, v, weight)` with `u < v`, sorted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DuplicationGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl DuplicationGraph {
    /// Builds a graph from `(a, b, weight)` triples. Parallel edges are
    /// summed; self-loops and non-positive weights are rejected.
    pub fn from_edges<S: AsRef<str>>(edges: impl IntoIterator<Item = (S, S, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on {a}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "edge {a}-{b} has weight {w}"
                )));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *merged
                .entry((key.0.to_string(), key.1.to_string()))
                .or_default() += w;
        }
        let nodes: Vec<String> = merged
            .keys()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut out: Vec<(usize, usize, f64)> = merged
            .iter()
            .map(|((a, b), &w)| (index[a.as_str()], index[b.as_str()], w))
            .collect();
        out.sort_by_key(|x| (x.0, x.1));
        Ok(Self { nodes, edges: out })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Every weight replaced by 1.
    pub fn binarized(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|&(u, v, _)| (u, v, 1.0)).collect(),
        }
    }

    /// Neighbor count per node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for &(u, v, _) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Weighted degree per node.
    pub fn strengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nodes.len()];
        for &(u, v, w) in &self.edges {
            s[u] += w;
            s[v] += w;
        }
        s
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdedGraph {
    pub graph: DuplicationGraph,
    /// Accounts incident to at least one retained edge.
    pub super_duplicators: BTreeSet<String>,
    pub min_shared: u64,
}

/// Keeps pairs with weight ≥ `min_shared`.
pub fn threshold_graph(pairs: &PairWeights, min_shared: u64) -> ThresholdedGraph {
    let kept: Vec<(&str, &str, f64)> = pairs
        .weights
        .iter()
        .filter(|(_, &w)| w >= min_shared)
        .map(|((a, b), &w)| (a.as_str(), b.as_str(), w as f64))
        .collect();
    let graph = DuplicationGraph::from_edges(kept)
        .expect("pair keys are distinct accounts with positive weight");
    ThresholdedGraph {
        super_duplicators: graph.nodes.iter().cloned().collect(),
        graph,
        min_shared,
    }
}

/// `account_a,account_b,weight` rows in node order.
pub fn write_edge_list_csv(path: &Path, graph: &DuplicationGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["account_a", "account_b", "weight"])?;
    for &(u, v, wt) in &graph.edges {
        w.write_record([
            graph.nodes[u].as_str(),
            graph.nodes[v].as_str(),
            &wt.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_edge_list_csv(path: &Path) -> Result<DuplicationGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(a), Some(b), Some(w)) = (rec.get(0), rec.get(1), rec.get(2)) else {
            return Err(Error::format(path, "expected account_a,account_b,weight"));
        };
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("bad weight {w:?}")))?;
        edges.push((a.to_string(), b.to_string(), w));
    }
    DuplicationGraph::from_edges(edges).map_err(|e| Error::format(path, e.to_string()))
}

/// All pair weights as `account_a,account_b,weight`.
pub fn write_pairs_csv(path: &Path, pairs: &PairWeights) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["account_a", "account_b", "weight"])?;
    for ((a, b), wt) in &pairs.weights {
        w.write_record([a.as_str(), b.as_str(), &wt.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::timestamp_format;
    use crate::dupcluster::Cluster;
    use proptest::prelude::*;

    fn clusters(groups: &[&[&str]]) -> ClusterSet {
        let t = timestamp_format::parse("2023-01-01T00:00:00Z").unwrap();
        ClusterSet {
            clusters: groups
                .iter()
                .enumerate()
                .map(|(i, g)| Cluster {
                    cluster_id: i,
                    members: g.iter().map(|s| s.to_string()).collect(),
                    first_ts: t,
                    last_ts: t,
                    active_span_seconds: 0,
                })
                .collect(),
            noise: vec![],
        }
    }

    /// Post ids encode their account as `<account>:<n>`.
    fn accounts_of(cs: &ClusterSet) -> HashMap<String, String> {
        cs.clusters
            .iter()
            .flat_map(|c| c.members.iter())
            .map(|m| (m.clone(), m.split(':').next().unwrap().to_string()))
            .collect()
    }

    #[test]
    fn once_per_cluster() {
        let cs = clusters(&[&["A:1", "A:2", "B:1"]]);
        let p = build_pairs(
            &cs,
            &accounts_of(&cs),
            PairMode::SharedClusters,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(p.weights.len(), 1);
        assert_eq!(p.weights[&("A".into(), "B".into())], 1);
        let pp = build_pairs(
            &cs,
            &accounts_of(&cs),
            PairMode::SharedPostPairs,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(pp.weights[&("A".into(), "B".into())], 2);
    }

    #[test]
    fn counts_across_clusters() {
        let owned: Vec<Vec<String>> = (0..12)
            .map(|i| vec![format!("A:{i}"), format!("B:{i}")])
            .collect();
        let refs: Vec<Vec<&str>> = owned
            .iter()
            .map(|g| g.iter().map(String::as_str).collect())
            .collect();
        let groups: Vec<&[&str]> = refs.iter().map(|g| g.as_slice()).collect();
        let cs = clusters(&groups);
        let p = build_pairs(
            &cs,
            &accounts_of(&cs),
            PairMode::SharedClusters,
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(p.weights[&("A".into(), "B".into())], 12);
    }

    #[test]
    fn single_account_cluster_has_no_pairs() {
        let cs = clusters(&[&["A:1", "A:2"]]);
        let p = build_pairs(
            &cs,
            &accounts_of(&cs),
            PairMode::SharedClusters,
            Execution::Sequential,
        )
        .unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn missing_account_names_post() {
        let cs = clusters(&[&["A:1", "B:1"]]);
        let mut m = accounts_of(&cs);
        m.remove("B:1");
        match build_pairs(&cs, &m, PairMode::SharedClusters, Execution::Sequential) {
            Err(Error::MissingAccount(p)) => assert_eq!(p, "B:1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn threshold_examples() {
        let mut p = PairWeights::default();
        p.weights.insert(("a".into(), "b".into()), 9);
        p.weights.insert(("a".into(), "c".into()), 10);
        p.weights.insert(("c".into(), "d".into()), 11);
        let t = threshold_graph(&p, 10);
        assert_eq!(t.graph.n_edges(), 2);
        assert_eq!(
            t.super_duplicators
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>(),
            ["a", "c", "d"]
        );
        let empty = threshold_graph(&PairWeights::default(), 10);
        assert!(empty.graph.is_empty());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = DuplicationGraph::from_edges([("b", "a", 2.0), ("c", "a", 1.0), ("a", "b", 1.0)])
            .unwrap();
        assert_eq!(g.edges, vec![(0, 1, 3.0), (0, 2, 1.0)]);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_edge_list_csv(f.path(), &g).unwrap();
        assert_eq!(
            std::fs::read_to_string(f.path()).unwrap(),
            "account_a,account_b,weight\na,b,3\na,c,1\n"
        );
        assert_eq!(read_edge_list_csv(f.path()).unwrap(), g);
        assert!(DuplicationGraph::from_edges([("a", "a", 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn pair_weight_conservation(
            raw in prop::collection::vec(prop::collection::vec(0u8..8, 2..7), 0..15)
        ) {
            let owned: Vec<Vec<String>> = raw
                .iter()
                .enumerate()
                .map(|(c, g)| g.iter().enumerate().map(|(k, a)| format!("{a}:{c}-{k}")).collect())
                .collect();
            let refs: Vec<Vec<&str>> = owned.iter().map(|g| g.iter().map(String::as_str).collect()).collect();
            let groups: Vec<&[&str]> = refs.iter().map(|g| g.as_slice()).collect();
            let cs = clusters(&groups);
            let p = build_pairs(&cs, &accounts_of(&cs), PairMode::SharedClusters, Execution::Parallel).unwrap();
            let expected: u64 = raw
                .iter()
                .map(|g| {
                    let d = g.iter().collect::<BTreeSet<_>>().len() as u64;
                    d * d.saturating_sub(1) / 2
                })
                .sum();
            prop_assert_eq!(p.total_weight(), expected);
        }

        #[test]
        fn threshold_monotone(ws in prop::collection::vec(1u64..20, 0..30), t in 1u64..20, dt in 0u64..10) {
            let mut p = PairWeights::default();
            for (i, w) in ws.iter().enumerate() {
                p.weights.insert((format!("a{}", i % 7), format!("b{i}")), *w);
            }
            let lo = threshold_graph(&p, t);
            let hi = threshold_graph(&p, t + dt);
            prop_assert!(hi.graph.n_edges() <= lo.graph.n_edges());
            prop_assert!(hi.super_duplicators.is_subset(&lo.super_duplicators));
        }
    }
}
