//! Exact eps-neighbor search.
//!
//! Pairs are screened with an f32 dot-product kernel (`‖u‖² + ‖v‖² − 2u·v`).
//! The screen carries a rigorous rounding-error bound: a pair whose screened
//! value lies within that bound of eps² is re-decided with
//! [`squared_euclidean`] in f64, so every decision equals
//! `euclidean(u, v) <= eps` computed in index order.

use crate::embed::{squared_euclidean, EmbeddingSet};
use crate::Execution;

const TILE: usize = 256;
const LANES: usize = 8;

/// Undirected eps-neighbor graph over positions `0..n` of the processing
/// order, in compressed sparse row form. Self is not listed.
pub(crate) struct NeighborGraph {
    offsets: Vec<usize>,
    adj: Vec<u32>,
}

impl NeighborGraph {
    pub(crate) fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[self.offsets[i]..self.offsets[i + 1]]
    }

    pub(crate) fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(a, b) in edges {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![0u32; offsets[n]];
        for &(a, b) in edges {
            adj[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n {
            adj[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { offsets, adj }
    }
}

type DotsFn = fn(&[f32], &[f32], usize, &mut [f32]);

fn dots_generic(u: &[f32], block: &[f32], dp: usize, out: &mut [f32]) {
    for (row, o) in block.chunks_exact(dp).zip(out.iter_mut()) {
        let mut acc = [0.0f32; LANES];
        for (a, b) in u.chunks_exact(LANES).zip(row.chunks_exact(LANES)) {
            for l in 0..LANES {
                acc[l] += a[l] * b[l];
            }
        }
        *o = acc.iter().sum();
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn dots_avx2(u: &[f32], block: &[f32], dp: usize, out: &mut [f32]) {
    use std::arch::x86_64::*;

    #[inline(always)]
    unsafe fn hsum(v: __m256) -> f32 {
        let lo = _mm256_castps256_ps128(v);
        let hi = _mm256_extractf128_ps::<1>(v);
        let s = _mm_add_ps(lo, hi);
        let s = _mm_add_ps(s, _mm_movehl_ps(s, s));
        let s = _mm_add_ss(s, _mm_shuffle_ps::<0x55>(s, s));
        _mm_cvtss_f32(s)
    }

    let rows = out.len();
    let up = u.as_ptr();
    let bp = block.as_ptr();
    let mut j = 0;
    while j + 4 <= rows {
        let (r0, r1, r2, r3) = (
            bp.add(j * dp),
            bp.add((j + 1) * dp),
            bp.add((j + 2) * dp),
            bp.add((j + 3) * dp),
        );
        let mut a0 = _mm256_setzero_ps();
        let mut a1 = _mm256_setzero_ps();
        let mut a2 = _mm256_setzero_ps();
        let mut a3 = _mm256_setzero_ps();
        let mut k = 0;
        while k < dp {
            let x = _mm256_loadu_ps(up.add(k));
            a0 = _mm256_fmadd_ps(x, _mm256_loadu_ps(r0.add(k)), a0);
            a1 = _mm256_fmadd_ps(x, _mm256_loadu_ps(r1.add(k)), a1);
            a2 = _mm256_fmadd_ps(x, _mm256_loadu_ps(r2.add(k)), a2);
            a3 = _mm256_fmadd_ps(x, _mm256_loadu_ps(r3.add(k)), a3);
            k += LANES;
        }
        out[j] = hsum(a0);
        out[j + 1] = hsum(a1);
        out[j + 2] = hsum(a2);
        out[j + 3] = hsum(a3);
        j += 4;
    }
    while j < rows {
        let r = bp.add(j * dp);
        let mut a = _mm256_setzero_ps();
        let mut k = 0;
        while k < dp {
            a = _mm256_fmadd_ps(_mm256_loadu_ps(up.add(k)), _mm256_loadu_ps(r.add(k)), a);
            k += LANES;
        }
        out[j] = hsum(a);
        j += 1;
    }
}

fn select_kernel() -> DotsFn {
    #[cfg(target_arch = "x86_64")]
    {
        if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU features were detected at runtime, and
            // callers pass `u.len() == dp` and `block.len() == out.len() * dp`
            // with `dp` a multiple of LANES.
            return |u, block, dp, out| unsafe { dots_avx2(u, block, dp, out) };
        }
    }
    dots_generic
}

/// Builds the eps-neighbor graph of `set` rows visited in `order`.
pub(crate) fn neighbor_graph(
    set: &EmbeddingSet,
    order: &[usize],
    eps: f64,
    exec: Execution,
) -> NeighborGraph {
    neighbor_graph_with(set, order, eps, exec, select_kernel())
}

fn neighbor_graph_with(
    set: &EmbeddingSet,
    order: &[usize],
    eps: f64,
    exec: Execution,
    dots: DotsFn,
) -> NeighborGraph {
    let n = order.len();
    let d = set.dim();
    let dp = d.div_ceil(LANES) * LANES;

    let mut m32 = vec![0.0f32; n * dp];
    let mut norms = vec![0.0f64; n];
    for (pos, &row) in order.iter().enumerate() {
        let v = set.vector(row);
        for (dst, &x) in m32[pos * dp..pos * dp + d].iter_mut().zip(v) {
            *dst = x as f32;
        }
        norms[pos] = v.iter().map(|x| x * x).sum();
    }

    let eps2 = eps * eps;
    // |screen - exact| <= (d + 4) 2^-24 (‖u‖² + ‖v‖²); doubled, plus slack
    // for the f64 side of the comparison.
    let rel = 2.0 * (d as f64 + 4.0) * f64::powi(2.0, -24);
    let slack = 1e-9 * eps2 + 1e-12;

    let n_tiles = n.div_ceil(TILE);
    let per_tile: Vec<Vec<(u32, u32)>> = exec.map_range(n_tiles, |t| {
        let mut edges = Vec::new();
        let mut out = vec![0.0f32; TILE];
        let i_lo = t * TILE;
        let i_hi = (i_lo + TILE).min(n);
        let mut j_tile = i_lo;
        while j_tile < n {
            let j_end = (j_tile + TILE).min(n);
            for i in i_lo..i_hi {
                let j_lo = j_tile.max(i + 1);
                if j_lo >= j_end {
                    continue;
                }
                let rows = j_end - j_lo;
                dots(
                    &m32[i * dp..(i + 1) * dp],
                    &m32[j_lo * dp..j_end * dp],
                    dp,
                    &mut out[..rows],
                );
                let ni = norms[i];
                for (k, &dot) in out[..rows].iter().enumerate() {
                    let j = j_lo + k;
                    let nj = norms[j];
                    let screen = ni + nj - 2.0 * dot as f64;
                    let margin = rel * (ni + nj) + slack;
                    let hit = if screen > eps2 + margin {
                        false
                    } else if screen < eps2 - margin {
                        true
                    } else {
                        squared_euclidean(set.vector(order[i]), set.vector(order[j])).sqrt() <= eps
                    };
                    if hit {
                        edges.push((i as u32, j as u32));
                    }
                }
            }
            j_tile = j_end;
        }
        edges
    });

    let edges: Vec<(u32, u32)> = per_tile.into_iter().flatten().collect();
    NeighborGraph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(set: &EmbeddingSet, eps: f64) -> Vec<Vec<u32>> {
        let n = set.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .filter(|&j| {
                        let mut acc = 0.0;
                        for (a, b) in set.vector(i).iter().zip(set.vector(j)) {
                            let t = a - b;
                            acc += t * t;
                        }
                        acc.sqrt() <= eps
                    })
                    .map(|j| j as u32)
                    .collect()
            })
            .collect()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingSet {
        let mut set = EmbeddingSet::new(d).unwrap();
        let centers: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..d).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        for i in 0..n {
            let c = &centers[i % 5];
            let v: Vec<f64> = c
                .iter()
                .map(|x| (x + rng.random_range(-0.08..0.08)).clamp(-1.0, 1.0))
                .collect();
            set.push(format!("{i}"), &v).unwrap();
        }
        set
    }

    #[test]
    fn kernels_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &d in &[3usize, 8, 13, 64] {
            let set = random_set(&mut rng, 300, d);
            let order: Vec<usize> = (0..set.len()).collect();
            let eps = 0.05 * (d as f64).sqrt();
            let expect = brute(&set, eps);
            for kernel in [dots_generic as DotsFn, select_kernel()] {
                for exec in [Execution::Sequential, Execution::Parallel] {
                    let g = neighbor_graph_with(&set, &order, eps, exec, kernel);
                    for (i, e) in expect.iter().enumerate() {
                        assert_eq!(g.neighbors(i), e.as_slice(), "d={d} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_pairs_use_exact_arithmetic() {
        let mut set = EmbeddingSet::new(2).unwrap();
        set.push("a", &[0.0, 0.0]).unwrap();
        set.push("b", &[0.6, 0.8]).unwrap();
        set.push("c", &[0.0, 0.0]).unwrap();
        let order = [0, 1, 2];
        // |b - a| is exactly 1.0 in f64 arithmetic
        let g = neighbor_graph(&set, &order, 1.0, Execution::Sequential);
        assert_eq!(g.neighbors(0), &[1, 2]);
        let g = neighbor_graph(&set, &order, 0.0, Execution::Sequential);
        assert_eq!(g.neighbors(0), &[2]);
        assert_eq!(g.degree(1), 0);
    }
}
