use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use log::warn;
use serde::Deserialize;
use serde_json::json;

use super::toxicity::{Dimension, ToxicityScorer, ToxicityScores};
use crate::{Error, Result};

/// Client for an external comment-scoring service.
///
/// Wire contract: `POST {"comment": {"text": str}, "requestedAttributes":
/// {ATTR: {}}}` answered by `{"attributeScores": {ATTR: {"summaryScore":
/// {"value": real}}}}`. The key travels as the `key` query parameter.
/// Batches run at most `max_in_flight` requests at once and start requests
/// no closer together than `min_interval`.
#[derive(Debug)]
pub struct PerspectiveClient {
    endpoint: String,
    api_key: Option<String>,
    max_in_flight: usize,
    max_attempts: u32,
    base_backoff: Duration,
    max_retry_after: Duration,
    min_interval: Duration,
    next_slot: Mutex<Instant>,
    agent: ureq::Agent,
}

enum Failure {
    Retry(String, Option<Duration>),
    Fatal(String),
}

#[derive(Deserialize)]
struct Response {
    #[serde(rename = "attributeScores")]
    attribute_scores: HashMap<String, AttributeScore>,
}

#[derive(Deserialize)]
struct AttributeScore {
    #[serde(rename = "summaryScore")]
    summary_score: SummaryScore,
}

#[derive(Deserialize)]
struct SummaryScore {
    value: f64,
}

impl PerspectiveClient {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key,
            max_in_flight: 4,
            max_attempts: 3,
            base_backoff: Duration::from_millis(500),
            max_retry_after: Duration::from_secs(60),
            min_interval: Duration::ZERO,
            next_slot: Mutex::new(Instant::now()),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(30))
                .build(),
        }
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn with_max_attempts(mut self, n: u32) -> Self {
        self.max_attempts = n.max(1);
        self
    }

    /// First retry waits `base`, then doubles. A `Retry-After` header takes
    /// precedence, capped at `max_retry_after`.
    pub fn with_backoff(mut self, base: Duration, max_retry_after: Duration) -> Self {
        self.base_backoff = base;
        self.max_retry_after = max_retry_after;
        self
    }

    /// Caps the request start rate; `0` disables the limit.
    pub fn with_rate_limit(mut self, requests_per_second: f64) -> Self {
        self.min_interval = if requests_per_second > 0.0 {
            Duration::from_secs_f64(1.0 / requests_per_second)
        } else {
            Duration::ZERO
        };
        self
    }

    fn wait_for_slot(&self) {
        if self.min_interval.is_zero() {
            return;
        }
        let start = {
            let mut next = self.next_slot.lock().expect("rate limiter lock");
            let now = Instant::now();
            let start = (*next).max(now);
            *next = start + self.min_interval;
            start
        };
        let now = Instant::now();
        if start > now {
            thread::sleep(start - now);
        }
    }

    fn request(&self, text: &str) -> std::result::Result<ToxicityScores, Failure> {
        self.wait_for_slot();
        let attrs: serde_json::Map<String, serde_json::Value> = Dimension::ALL
            .iter()
            .map(|d| (d.attribute().to_string(), json!({})))
            .collect();
        let body = json!({"comment": {"text": text}, "requestedAttributes": attrs});
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.query("key", key);
        }
        let resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let retry_after = r
                    .header("Retry-After")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .filter(|s| s.is_finite() && *s >= 0.0)
                    .map(|s| Duration::from_secs_f64(s).min(self.max_retry_after));
                let msg = format!("HTTP {code}");
                return Err(if code == 429 || code >= 500 {
                    Failure::Retry(msg, retry_after)
                } else {
                    Failure::Fatal(msg)
                });
            }
            Err(e) => return Err(Failure::Retry(e.to_string(), None)),
        };
        let parsed: Response = resp
            .into_json()
            .map_err(|e| Failure::Fatal(format!("bad response body: {e}")))?;
        let mut s = ToxicityScores::default();
        for d in Dimension::ALL {
            let v = parsed
                .attribute_scores
                .get(d.attribute())
                .map(|a| a.summary_score.value)
                .ok_or_else(|| Failure::Fatal(format!("response lacks {}", d.attribute())))?;
            s.set(d, v);
        }
        s.validate().map_err(|e| Failure::Fatal(e.to_string()))?;
        Ok(s)
    }
}

impl ToxicityScorer for PerspectiveClient {
    fn score(&self, text: &str) -> Result<ToxicityScores> {
        let mut last = String::new();
        for attempt in 0..self.max_attempts {
            match self.request(text) {
                Ok(s) => return Ok(s),
                Err(Failure::Fatal(msg)) => return Err(Error::Service(msg)),
                Err(Failure::Retry(msg, retry_after)) => {
                    warn!("scoring attempt {}: {msg}", attempt + 1);
                    last = msg;
                    if attempt + 1 < self.max_attempts {
                        thread::sleep(retry_after.unwrap_or(self.base_backoff * 2u32.pow(attempt)));
                    }
                }
            }
        }
        Err(Error::Service(format!(
            "gave up after {} attempts: {last}",
            self.max_attempts
        )))
    }

    fn score_batch(&self, texts: &[String]) -> Vec<Result<ToxicityScores>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<ToxicityScores>>>> =
            texts.iter().map(|_| Mutex::new(None)).collect();
        thread::scope(|s| {
            for _ in 0..self.max_in_flight.min(texts.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= texts.len() {
                        break;
                    }
                    let r = self.score(&texts[i]);
                    *slots[i].lock().expect("result slot") = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| {
                m.into_inner()
                    .expect("result slot")
                    .expect("every text scored")
            })
            .collect()
    }
}
