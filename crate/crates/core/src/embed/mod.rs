//! Embedding sets, distance functions and embedding providers.
//!
//! Loaded embeddings are only required to have components in [-1, 1]; they
//! are not assumed to be unit-norm. The hashed n-gram fallback does produce
//! unit vectors.

mod distance;
mod hashed;
mod service;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, Post};
use crate::{Error, Execution, Result};

pub use distance::{cosine, euclidean, squared_euclidean};
pub use hashed::{hashed_ngram_embed, HashedNgram};
pub use service::{fetch_embeddings, EmbeddingService, FetchStats};

pub const DEFAULT_DIM: usize = 384;

/// Fixed-dimension vectors keyed by post id, stored row-major.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingSet {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

pub(crate) fn validate_components(v: &[f64]) -> std::result::Result<(), String> {
    match v
        .iter()
        .position(|x| !x.is_finite() || !(-1.0..=1.0).contains(x))
    {
        Some(k) => Err(format!("component {k} = {} outside [-1, 1]", v[k])),
        None => Ok(()),
    }
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            ..Default::default()
        })
    }

    /// Appends a vector; rejects wrong length, out-of-range components and
    /// repeated ids.
    pub fn push(&mut self, id: impl Into<String>, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: v.len(),
            });
        }
        validate_components(v).map_err(Error::InvalidArgument)?;
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(Error::InvalidArgument(format!(
                "duplicate embedding id {id}"
            )));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.position(id).map(|i| self.vector(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim.max(1)))
    }

    /// Row-major component buffer.
    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedLoadStats {
    pub loaded: usize,
    pub rejected: usize,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRow {
    id: String,
    v: Vec<f64>,
}

/// Reads `{"id": str, "v": [real]}` rows. Rows with out-of-range components,
/// repeated ids or bad JSON are rejected and counted; a row whose length
/// differs from the first row is fatal.
pub fn load_embeddings(path: &Path) -> Result<(EmbeddingSet, EmbedLoadStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set: Option<EmbeddingSet> = None;
    let mut stats = EmbedLoadStats::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: EmbeddingRow = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warn!("{}:{}: {e}", path.display(), i + 1);
                stats.rejected += 1;
                continue;
            }
        };
        if set.is_none() {
            set = Some(
                EmbeddingSet::new(row.v.len()).map_err(|e| Error::format(path, e.to_string()))?,
            );
        }
        let s = set.as_mut().unwrap();
        if row.v.len() != s.dim() {
            return Err(Error::format(
                path,
                format!(
                    "line {}: dimension {} differs from {}",
                    i + 1,
                    row.v.len(),
                    s.dim()
                ),
            ));
        }
        if let Err(e) = s.push(row.id, &row.v) {
            warn!("{}:{}: {e}", path.display(), i + 1);
            stats.rejected += 1;
        }
    }
    let set = set.unwrap_or_default();
    stats.loaded = set.len();
    Ok((set, stats))
}

pub fn write_embeddings(path: &Path, set: &EmbeddingSet) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, v) in set.iter() {
        serde_json::to_writer(&mut w, &serde_json::json!({ "id": id, "v": v }))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A local text embedder.
pub trait TextEmbedder: Sync {
    fn dim(&self) -> usize;
    /// `None` marks the text as un-embeddable.
    fn embed(&self, text: &str) -> Option<Vec<f64>>;
}

#[derive(Debug, Default)]
pub struct EmbedOutcome {
    pub set: EmbeddingSet,
    /// Posts whose normalized text could not be embedded, in input order.
    pub unembeddable: Vec<String>,
}

/// Embeds the normalized text of every post; un-embeddable posts are left
/// out of the set and listed separately.
pub fn embed_posts<E: TextEmbedder>(
    posts: &[Post],
    embedder: &E,
    exec: Execution,
) -> Result<EmbedOutcome> {
    let vectors = exec.map(posts, |p| embedder.embed(&normalize_text(&p.text)));
    let mut out = EmbedOutcome {
        set: EmbeddingSet::new(embedder.dim())?,
        unembeddable: Vec::new(),
    };
    for (p, v) in posts.iter().zip(vectors) {
        match v {
            Some(v) => out.set.push(p.id.clone(), &v)?,
            None => out.unembeddable.push(p.id.clone()),
        }
    }
    Ok(out)
}
