use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dupgraph::DuplicationGraph;
use crate::embed::EmbeddingSet;
use crate::{Error, Result};

/// Stochastic block graph with integer weights in `1..=5`. Returns the
/// graph and the planted block of each node, in the graph's node order.
/// Nodes left without edges are absent from the graph.
pub fn planted_block_graph(
    n_blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(DuplicationGraph, Vec<usize>)> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::InvalidArgument(
            "edge probabilities must be in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_blocks * block_size;
    let width = n.max(1).to_string().len();
    let name = |i: usize| format!("n{i:0width$}");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / block_size == j / block_size {
                p_in
            } else {
                p_out
            };
            if rng.random_bool(p) {
                edges.push((name(i), name(j), rng.random_range(1..=5) as f64));
            }
        }
    }
    let graph = DuplicationGraph::from_edges(edges)?;
    let blocks = graph
        .nodes
        .iter()
        .map(|id| id[1..].parse::<usize>().expect("generated id") / block_size)
        .collect();
    Ok((graph, blocks))
}

/// Points around `n_centers` random centers with per-axis uniform jitter of
/// half-width `spread`, plus a `noise_fraction` of uniform points; all
/// components clamped to [-1, 1]. Ids are zero-padded and ascend with
/// generation order.
pub fn clustered_points(
    n: usize,
    dim: usize,
    n_centers: usize,
    spread: f64,
    noise_fraction: f64,
    seed: u64,
) -> Result<EmbeddingSet> {
    if !(0.0..=1.0).contains(&noise_fraction) || spread.is_nan() || spread < 0.0 {
        return Err(Error::InvalidArgument("bad point-cloud parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..n_centers.max(1))
        .map(|_| (0..dim).map(|_| rng.random_range(-0.9..=0.9)).collect())
        .collect();
    let mut set = EmbeddingSet::new(dim)?;
    let width = n.max(1).to_string().len();
    let mut v = vec![0.0; dim];
    for i in 0..n {
        if n_centers == 0 || rng.random_bool(noise_fraction) {
            v.iter_mut().for_each(|x| *x = rng.random_range(-1.0..=1.0));
        } else {
            let c = &centers[rng.random_range(0..n_centers)];
            for (x, &m) in v.iter_mut().zip(c) {
                let jitter = if spread > 0.0 {
                    rng.random_range(-spread..=spread)
                } else {
                    0.0
                };
                *x = (m + jitter).clamp(-1.0, 1.0);
            }
        }
        set.push(format!("x{i:0width$}"), &v)?;
    }
    Ok(set)
}
