use std::path::Path;
use std::thread;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{validate_components, write_embeddings, EmbeddingSet};
use crate::corpus::{normalize_text, Post};
use crate::{Error, Result};

/// Client for an external embedding service.
///
/// Wire contract: `POST {"texts": [str]}` answered by `{"vectors": [[real]]}`
/// in request order. The API key, when set, goes in a bearer header.
#[derive(Clone, Debug)]
pub struct EmbeddingService {
    endpoint: String,
    api_key: Option<String>,
    max_attempts: u32,
    base_backoff: Duration,
    agent: ureq::Agent,
}

impl EmbeddingService {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key,
            max_attempts: 3,
            base_backoff: Duration::from_millis(500),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(60))
                .build(),
        }
    }

    /// First retry waits `base`, then doubles.
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.base_backoff = base;
        self
    }

    pub fn with_max_attempts(mut self, attempts: u32) -> Self {
        self.max_attempts = attempts.max(1);
        self
    }

    fn request(
        &self,
        texts: &[String],
        dim: Option<usize>,
    ) -> std::result::Result<Vec<Vec<f64>>, String> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp: VectorsResponse = req
            .send_json(TextsRequest { texts })
            .map_err(|e| e.to_string())?
            .into_json()
            .map_err(|e| format!("bad response body: {e}"))?;
        if resp.vectors.len() != texts.len() {
            return Err(format!(
                "service returned {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            ));
        }
        let want = dim
            .or_else(|| resp.vectors.first().map(Vec::len))
            .unwrap_or(0);
        for v in &resp.vectors {
            if v.len() != want || want == 0 {
                return Err(format!(
                    "vector of dimension {} where {want} expected",
                    v.len()
                ));
            }
            validate_components(v)?;
        }
        Ok(resp.vectors)
    }
}

#[derive(Serialize)]
struct TextsRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct VectorsResponse {
    vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchStats {
    pub batches: usize,
    /// HTTP requests issued, retries included.
    pub requests: usize,
    pub unembeddable: Vec<String>,
}

/// Embeds posts through the service in batches of `batch_size`.
///
/// A batch whose response breaks the contract (wrong count, wrong dimension,
/// out-of-range values, transport or HTTP error) is retried with exponential
/// backoff. When a batch still fails, the vectors fetched so far are written
/// to `checkpoint` (embedding JSONL) before the error is returned.
pub fn fetch_embeddings(
    posts: &[Post],
    service: &EmbeddingService,
    batch_size: usize,
    checkpoint: Option<&Path>,
) -> Result<(EmbeddingSet, FetchStats)> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mut stats = FetchStats::default();
    let mut items = Vec::with_capacity(posts.len());
    for p in posts {
        let text = normalize_text(&p.text);
        if text.is_empty() {
            stats.unembeddable.push(p.id.clone());
        } else {
            items.push((p.id.as_str(), text));
        }
    }

    let mut set: Option<EmbeddingSet> = None;
    for chunk in items.chunks(batch_size) {
        stats.batches += 1;
        let texts: Vec<String> = chunk.iter().map(|(_, t)| t.clone()).collect();
        let mut last_err = String::new();
        let mut vectors = None;
        for attempt in 0..service.max_attempts {
            if attempt > 0 {
                thread::sleep(service.base_backoff * 2u32.pow(attempt - 1));
            }
            stats.requests += 1;
            match service.request(&texts, set.as_ref().map(EmbeddingSet::dim)) {
                Ok(v) => {
                    vectors = Some(v);
                    break;
                }
                Err(e) => {
                    warn!(
                        "embedding batch {} attempt {}: {e}",
                        stats.batches,
                        attempt + 1
                    );
                    last_err = e;
                }
            }
        }
        let Some(vectors) = vectors else {
            let mut msg = format!(
                "batch {} failed after {} attempts: {last_err}",
                stats.batches, service.max_attempts
            );
            if let Some(path) = checkpoint {
                write_embeddings(path, set.as_ref().unwrap_or(&EmbeddingSet::default()))?;
                msg.push_str(&format!("; partial progress saved to {}", path.display()));
            }
            return Err(Error::Service(msg));
        };
        let s = match &mut set {
            Some(s) => s,
            None => set.insert(EmbeddingSet::new(vectors[0].len())?),
        };
        for ((id, _), v) in chunk.iter().zip(&vectors) {
            s.push(*id, v)?;
        }
    }
    Ok((set.unwrap_or_default(), stats))
}
