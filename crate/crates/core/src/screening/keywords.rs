use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, PostCollection};
use crate::dupcluster::ClusterSet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordMatch {
    /// Case-insensitive substring.
    #[default]
    Substring,
    /// Case-insensitive, delimited by word boundaries.
    WordBoundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopCluster {
    pub cluster_id: usize,
    pub active_span_seconds: i64,
    pub size: usize,
    pub n_matching: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordHit {
    pub keyword: String,
    /// Clustered posts whose text matches.
    pub n_tweets: usize,
    pub n_clusters: usize,
    /// Longest-active matching clusters, ties by cluster id.
    pub top_clusters: Vec<TopCluster>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordReport {
    pub top_k: usize,
    /// Clustered posts matching at least one keyword.
    pub n_tweets_any: usize,
    pub n_clusters_any: usize,
    pub hits: Vec<KeywordHit>,
}

enum Matcher {
    Substring(String),
    Word(Regex),
}

impl Matcher {
    fn new(keyword: &str, mode: KeywordMatch) -> Result<Self> {
        let folded = keyword.trim().to_lowercase();
        if folded.is_empty() {
            return Err(Error::InvalidArgument("empty keyword".into()));
        }
        Ok(match mode {
            KeywordMatch::Substring => Matcher::Substring(folded),
            KeywordMatch::WordBoundary => Matcher::Word(
                Regex::new(&format!(r"\b{}\b", regex::escape(&folded)))
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?,
            ),
        })
    }

    fn is_match(&self, folded_text: &str) -> bool {
        match self {
            Matcher::Substring(k) => folded_text.contains(k.as_str()),
            Matcher::Word(re) => re.is_match(folded_text),
        }
    }
}

/// Matches keywords against the normalized, case-folded text of clustered
/// posts. A cluster matches when any member does.
pub fn keyword_surface(
    clusters: &ClusterSet,
    posts: &PostCollection,
    keywords: &[String],
    top_k: usize,
    mode: KeywordMatch,
) -> Result<KeywordReport> {
    if keywords.is_empty() {
        return Err(Error::InvalidArgument("keyword list is empty".into()));
    }
    let matchers = keywords
        .iter()
        .map(|k| Matcher::new(k, mode))
        .collect::<Result<Vec<_>>>()?;

    let mut texts: Vec<Vec<String>> = Vec::with_capacity(clusters.len());
    for c in &clusters.clusters {
        let t = c
            .members
            .iter()
            .map(|m| {
                posts
                    .get(m)
                    .map(|p| normalize_text(&p.text).to_lowercase())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("clustered post {m} not in corpus"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        texts.push(t);
    }

    let mut any_post = vec![Vec::new(); clusters.len()];
    for (ci, t) in texts.iter().enumerate() {
        any_post[ci] = vec![false; t.len()];
    }
    let mut hits = Vec::with_capacity(keywords.len());
    for (kw, matcher) in keywords.iter().zip(&matchers) {
        let mut n_tweets = 0;
        let mut matched: Vec<TopCluster> = Vec::new();
        for (ci, c) in clusters.clusters.iter().enumerate() {
            let mut n = 0;
            for (pi, text) in texts[ci].iter().enumerate() {
                if matcher.is_match(text) {
                    n += 1;
                    any_post[ci][pi] = true;
                }
            }
            if n > 0 {
                n_tweets += n;
                matched.push(TopCluster {
                    cluster_id: c.cluster_id,
                    active_span_seconds: c.active_span_seconds,
                    size: c.size(),
                    n_matching: n,
                });
            }
        }
        let n_clusters = matched.len();
        matched.sort_by(|a, b| {
            b.active_span_seconds
                .cmp(&a.active_span_seconds)
                .then(a.cluster_id.cmp(&b.cluster_id))
        });
        matched.truncate(top_k);
        hits.push(KeywordHit {
            keyword: kw.clone(),
            n_tweets,
            n_clusters,
            top_clusters: matched,
        });
    }
    Ok(KeywordReport {
        top_k,
        n_tweets_any: any_post.iter().flatten().filter(|&&b| b).count(),
        n_clusters_any: any_post.iter().filter(|c| c.iter().any(|&b| b)).count(),
        hits,
    })
}
