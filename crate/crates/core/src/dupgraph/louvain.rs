use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DuplicationGraph;
use crate::{Error, Result};

/// Stop aggregating once a level improves Q by less than this.
const LEVEL_GAIN: f64 = 1e-7;
/// A single move must raise Q by more than this.
const MOVE_GAIN: f64 = 1e-12;

/// Community per graph node, in the graph's node order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub nodes: Vec<String>,
    /// Community ids are numbered by first appearance in node order.
    pub assignment: Vec<usize>,
    pub n_communities: usize,
    pub q: f64,
    /// Q of the singleton partition followed by Q after each level.
    pub q_history: Vec<f64>,
}

impl Partition {
    pub fn community_of(&self, id: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|n| n.as_str().cmp(id))
            .ok()
            .map(|i| self.assignment[i])
    }

    /// Node indices per community.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn as_map(&self) -> HashMap<String, usize> {
        self.nodes
            .iter()
            .cloned()
            .zip(self.assignment.iter().copied())
            .collect()
    }

    /// `account_id,community_id` rows in node order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["account_id", "community_id"])?;
        for (n, c) in self.nodes.iter().zip(&self.assignment) {
            w.write_record([n.as_str(), &c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Q = Σ_c [w_in(c)/W − (s(c)/2W)²] for labels given per node index.
pub fn modularity_of_labels(graph: &DuplicationGraph, labels: &[usize]) -> Result<f64> {
    if labels.len() != graph.n_nodes() {
        return Err(Error::Dimension {
            expected: graph.n_nodes(),
            found: labels.len(),
        });
    }
    let w = graph.total_weight();
    if w == 0.0 {
        return Ok(0.0);
    }
    let mut within: BTreeMap<usize, f64> = BTreeMap::new();
    let mut strength: BTreeMap<usize, f64> = BTreeMap::new();
    for &(u, v, wt) in &graph.edges {
        *strength.entry(labels[u]).or_default() += wt;
        *strength.entry(labels[v]).or_default() += wt;
        if labels[u] == labels[v] {
            *within.entry(labels[u]).or_default() += wt;
        }
    }
    Ok(strength
        .iter()
        .map(|(c, s)| within.get(c).copied().unwrap_or(0.0) / w - (s / (2.0 * w)).powi(2))
        .sum())
}

/// Modularity of a partition given as account id to community.
pub fn modularity(graph: &DuplicationGraph, partition: &HashMap<String, usize>) -> Result<f64> {
    let labels = graph
        .nodes
        .iter()
        .map(|n| {
            partition
                .get(n)
                .copied()
                .ok_or_else(|| Error::UncoveredNode(n.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    modularity_of_labels(graph, &labels)
}

/// One aggregation level: edges once each with `u < v`, plus per-node
/// self-loop weight holding collapsed internal edges.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    /// Weighted degree, self-loops counted twice.
    k: Vec<f64>,
}

impl Level {
    fn new(n: usize, edges: &[(usize, usize, f64)], self_loop: Vec<f64>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut k: Vec<f64> = self_loop.iter().map(|s| 2.0 * s).collect();
        for &(u, v, w) in edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
            k[u] += w;
            k[v] += w;
        }
        Self { adj, self_loop, k }
    }

    fn n(&self) -> usize {
        self.k.len()
    }

    /// Local moving until no node changes community. Returns communities
    /// renumbered `0..` by first appearance, and whether anything moved.
    fn local_moves(&self, m2: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.n();
        let w = m2 / 2.0;
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.k.clone();
        let mut link = vec![0.0f64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut moved_any = false;
        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let own = comm[i];
                for &(j, wt) in &self.adj[i] {
                    let c = comm[j];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += wt;
                }
                tot[own] -= self.k[i];
                let gain = |c: usize, l: f64| l - tot[c] * self.k[i] / m2;
                let own_gain = gain(own, link[own]);
                let (mut best, mut best_gain) = (own, own_gain);
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != own && (best_gain - own_gain) / w <= MOVE_GAIN {
                    best = own;
                }
                tot[best] += self.k[i];
                if best != own {
                    comm[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (renumber(&comm), moved_any)
    }

    fn aggregate(&self, comm: &[usize], n_comm: usize) -> Self {
        let mut self_loop = vec![0.0; n_comm];
        for (i, &s) in self.self_loop.iter().enumerate() {
            self_loop[comm[i]] += s;
        }
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &(v, w) in nbrs {
                if u >= v {
                    continue;
                }
                let (cu, cv) = (comm[u], comm[v]);
                if cu == cv {
                    self_loop[cu] += w;
                } else {
                    *between.entry((cu.min(cv), cu.max(cv))).or_default() += w;
                }
            }
        }
        let edges: Vec<(usize, usize, f64)> =
            between.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        Self::new(n_comm, &edges, self_loop)
    }
}

fn renumber(labels: &[usize]) -> Vec<usize> {
    let mut map: HashMap<usize, usize> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Two-phase Louvain on the weighted graph. Node visit order is shuffled
/// per sweep from `seed`, so a fixed seed reproduces the partition.
pub fn louvain(graph: &DuplicationGraph, seed: u64) -> Partition {
    let n = graph.n_nodes();
    let singletons: Vec<usize> = (0..n).collect();
    let q0 = modularity_of_labels(graph, &singletons).unwrap_or(0.0);
    let m2 = 2.0 * graph.total_weight();
    if n == 0 || m2 == 0.0 {
        return Partition {
            nodes: graph.nodes.clone(),
            assignment: singletons.clone(),
            n_communities: n,
            q: q0,
            q_history: vec![q0],
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::new(n, &graph.edges, vec![0.0; n]);
    let mut node_comm = singletons;
    let mut q = q0;
    let mut history = vec![q0];
    loop {
        let (comm, moved) = level.local_moves(m2, &mut rng);
        if !moved {
            break;
        }
        for c in node_comm.iter_mut() {
            *c = comm[*c];
        }
        let n_comm = comm.iter().max().map_or(0, |m| m + 1);
        let q_next = modularity_of_labels(graph, &node_comm).expect("labels cover the graph");
        history.push(q_next);
        let gain = q_next - q;
        q = q_next;
        if gain < LEVEL_GAIN || n_comm == level.n() {
            break;
        }
        level = level.aggregate(&comm, n_comm);
    }

    let assignment = renumber(&node_comm);
    Partition {
        nodes: graph.nodes.clone(),
        n_communities: assignment.iter().max().map_or(0, |m| m + 1),
        assignment,
        q,
        q_history: history,
    }
}
