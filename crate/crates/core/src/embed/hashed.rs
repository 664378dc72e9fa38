use xxhash_rust::xxh3::xxh3_64_with_seed;

use super::TextEmbedder;
use crate::{Error, Result};

/// Deterministic character n-gram feature hashing.
///
/// The lowercased text, padded with one space on each side, is cut into
/// character n-grams for every n in `ngram_range`. Each gram is hashed with
/// seeded xxh3: the low bits pick a bucket, the top bit a sign. The
/// accumulated vector is scaled to unit Euclidean norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashedNgram {
    dim: usize,
    ngram_range: (usize, usize),
    seed: u64,
}

impl HashedNgram {
    pub const DEFAULT_RANGE: (usize, usize) = (3, 5);

    pub fn new(dim: usize, ngram_range: (usize, usize), seed: u64) -> Result<Self> {
        if dim < 8 {
            return Err(Error::InvalidArgument(format!(
                "hashed embedding needs dim >= 8, got {dim}"
            )));
        }
        let (lo, hi) = ngram_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "bad n-gram range ({lo}, {hi})"
            )));
        }
        Ok(Self {
            dim,
            ngram_range,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `None` for text that is empty after trimming.
    pub fn embed(&self, text: &str) -> Option<Vec<f64>> {
        if text.trim().is_empty() {
            return None;
        }
        let mut chars = vec![' '];
        chars.extend(text.trim().chars().flat_map(char::to_lowercase));
        chars.push(' ');

        let mut v = vec![0.0f64; self.dim];
        let mut buf = String::new();
        let mut add = |gram: &[char], v: &mut [f64]| {
            buf.clear();
            buf.extend(gram);
            let h = xxh3_64_with_seed(buf.as_bytes(), self.seed);
            let bucket = ((h & 0x7fff_ffff_ffff_ffff) % self.dim as u64) as usize;
            v[bucket] += if h >> 63 == 1 { -1.0 } else { 1.0 };
        };

        let (lo, hi) = self.ngram_range;
        if chars.len() < lo {
            add(&chars, &mut v);
        }
        for n in lo..=hi.min(chars.len()) {
            for gram in chars.windows(n) {
                add(gram, &mut v);
            }
        }

        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Some(v)
    }
}

impl TextEmbedder for HashedNgram {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Option<Vec<f64>> {
        HashedNgram::embed(self, text)
    }
}

/// One-shot form of [`HashedNgram::embed`].
pub fn hashed_ngram_embed(
    text: &str,
    dim: usize,
    ngram_range: (usize, usize),
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    Ok(HashedNgram::new(dim, ngram_range, seed)?.embed(text))
}
