//! Ratcliff/Obershelp similarity and the chronological sliding-window
//! duplicate scan built on it.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, Post, PostCollection};
use crate::dupcluster::ClusterSet;
use crate::{Error, Execution, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RopmParams {
    pub window: usize,
    pub sim_threshold: f64,
    /// Compare normalized text instead of raw text.
    pub normalize: bool,
}

impl Default for RopmParams {
    fn default() -> Self {
        Self {
            window: 10,
            sim_threshold: 0.9,
            normalize: true,
        }
    }
}

impl RopmParams {
    pub fn new(window: usize, sim_threshold: f64) -> Result<Self> {
        if window < 1 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if !(sim_threshold > 0.0 && sim_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sim_threshold must be in (0, 1], got {sim_threshold}"
            )));
        }
        Ok(Self {
            window,
            sim_threshold,
            normalize: true,
        })
    }
}

/// Longest common substring of `a[alo..ahi]` and `b[blo..bhi]`; ties go to
/// the smallest start in `a`, then in `b`. Returns `(i, j, len)`.
fn longest_match(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
    row: &mut Vec<u32>,
) -> (usize, usize, usize) {
    let w = bhi - blo;
    row.clear();
    row.resize(w + 1, 0);
    let (mut bi, mut bj, mut best) = (alo, blo, 0usize);
    for (i, &ai) in a.iter().enumerate().take(ahi).skip(alo) {
        // row[k + 1] holds the match length ending at (i - 1, blo + k); walk
        // right to left so it is read before being overwritten.
        for k in (0..w).rev() {
            if ai == b[blo + k] {
                let len = row[k] + 1;
                row[k + 1] = len;
                let len = len as usize;
                let (si, sj) = (i + 1 - len, blo + k + 1 - len);
                if len > best || (len == best && (si < bi || (si == bi && sj < bj))) {
                    best = len;
                    bi = si;
                    bj = sj;
                }
            } else {
                row[k + 1] = 0;
            }
        }
    }
    (bi, bj, best)
}

/// Matched character count for one orientation. With `need`, returns `None`
/// as soon as the count provably stays below it.
fn matched(a: &[char], b: &[char], need: Option<usize>) -> Option<usize> {
    let mut row = Vec::new();
    let mut stack = vec![(0, a.len(), 0, b.len())];
    let mut total = 0usize;
    // Upper bound on what the pending ranges can still add.
    let mut pending = a.len().min(b.len());
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        pending -= (ahi - alo).min(bhi - blo);
        if alo == ahi || blo == bhi {
            continue;
        }
        let (i, j, k) = longest_match(a, b, alo, ahi, blo, bhi, &mut row);
        if k == 0 {
            continue;
        }
        total += k;
        let left = (alo, i, blo, j);
        let right = (i + k, ahi, j + k, bhi);
        pending += (i - alo).min(j - blo) + (ahi - i - k).min(bhi - j - k);
        if let Some(need) = need {
            if total + pending < need {
                return None;
            }
        }
        stack.push(right);
        stack.push(left);
    }
    Some(total)
}

/// Matched character count M, maximized over both argument orders so the
/// measure is symmetric.
pub fn matched_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    matched_pair(&a, &b)
}

fn matched_pair(a: &[char], b: &[char]) -> usize {
    let m1 = matched(a, b, None).unwrap_or(0);
    let m2 = matched(b, a, None).unwrap_or(0);
    m1.max(m2)
}

fn ratio(m: usize, total_len: usize) -> f64 {
    if total_len == 0 {
        1.0
    } else {
        2.0 * m as f64 / total_len as f64
    }
}

/// 2·M / (|a| + |b|) over characters; two empty strings score 1.
pub fn ratcliff_obershelp(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ratio(matched_pair(&a, &b), a.len() + b.len())
}

const HIST: usize = 128;

struct Prepared {
    chars: Vec<char>,
    /// Folded character histogram; its overlap bounds M from above.
    hist: [u16; HIST],
}

impl Prepared {
    fn new(text: &str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let mut hist = [0u16; HIST];
        for &c in &chars {
            let slot = &mut hist[c as usize % HIST];
            *slot = slot.saturating_add(1);
        }
        Self { chars, hist }
    }
}

/// Same decision as `ratcliff_obershelp(a, b) >= threshold`, with pruning.
fn similar(a: &Prepared, b: &Prepared, threshold: f64) -> bool {
    let n = a.chars.len() + b.chars.len();
    if n == 0 {
        return 1.0 >= threshold;
    }
    let passes = |m: usize| ratio(m, n) >= threshold;
    if !passes(a.chars.len().min(b.chars.len())) {
        return false;
    }
    let overlap: usize = a
        .hist
        .iter()
        .zip(&b.hist)
        .map(|(&x, &y)| x.min(y) as usize)
        .sum();
    if !passes(overlap) {
        return false;
    }
    // Smallest M that passes.
    let need = (0..=overlap).find(|&m| passes(m)).unwrap_or(overlap);
    matched(&a.chars, &b.chars, Some(need)).is_some_and(passes)
        || matched(&b.chars, &a.chars, Some(need)).is_some_and(passes)
}

/// Detected duplicate pairs, each ordered `(smaller id, larger id)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DupPairSet {
    pub pairs: BTreeSet<(String, String)>,
}

impl DupPairSet {
    pub fn insert(&mut self, a: &str, b: &str) -> bool {
        match a.cmp(b) {
            std::cmp::Ordering::Less => self.pairs.insert((a.to_string(), b.to_string())),
            std::cmp::Ordering::Greater => self.pairs.insert((b.to_string(), a.to_string())),
            std::cmp::Ordering::Equal => false,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn posts(&self) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect()
    }

    /// Posts without an account in `post_accounts` are not counted as accounts.
    pub fn summary(&self, post_accounts: &HashMap<String, String>) -> DupSummary {
        let posts = self.posts();
        let accounts: BTreeSet<&str> = posts
            .iter()
            .filter_map(|p| post_accounts.get(*p).map(String::as_str))
            .collect();
        DupSummary {
            n_dup_tweets: posts.len(),
            n_pairs: self.pairs.len() as u64,
            n_accounts: accounts.len(),
        }
    }
}

/// Duplicate tweets, duplicate pairs and duplicating accounts for one detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DupSummary {
    pub n_dup_tweets: usize,
    pub n_pairs: u64,
    pub n_accounts: usize,
}

impl DupSummary {
    /// The same triple for clustering output: clustered posts, within-cluster
    /// post pairs, accounts with a clustered post.
    pub fn from_clusters(
        clusters: &ClusterSet,
        post_accounts: &HashMap<String, String>,
    ) -> Result<Self> {
        let mut accounts = BTreeSet::new();
        for c in &clusters.clusters {
            for m in &c.members {
                let a = post_accounts
                    .get(m)
                    .ok_or_else(|| Error::MissingAccount(m.clone()))?;
                accounts.insert(a.as_str());
            }
        }
        Ok(Self {
            n_dup_tweets: clusters.n_clustered_posts(),
            n_pairs: clusters
                .clusters
                .iter()
                .map(|c| (c.size() * (c.size() - 1) / 2) as u64)
                .sum(),
            n_accounts: accounts.len(),
        })
    }
}

/// Orders posts by timestamp, ties by id.
pub fn chronological(posts: &PostCollection) -> Vec<&Post> {
    let mut v: Vec<&Post> = posts.iter().collect();
    v.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    v
}

/// Compares every post with the next `window` posts in chronological order
/// and records pairs whose similarity reaches the threshold.
pub fn ropm_scan(posts: &PostCollection, params: &RopmParams, exec: Execution) -> DupPairSet {
    let order = chronological(posts);
    let prepared: Vec<Prepared> = exec.map(&order, |p| {
        if params.normalize {
            Prepared::new(&normalize_text(&p.text))
        } else {
            Prepared::new(&p.text)
        }
    });
    let n = order.len();
    let hits: Vec<Vec<usize>> = exec.map_range(n, |i| {
        let end = (i + 1 + params.window).min(n);
        (i + 1..end)
            .filter(|&j| similar(&prepared[i], &prepared[j], params.sim_threshold))
            .collect()
    });
    let mut out = DupPairSet::default();
    for (i, js) in hits.into_iter().enumerate() {
        for j in js {
            out.insert(&order[i].id, &order[j].id);
        }
    }
    out
}
