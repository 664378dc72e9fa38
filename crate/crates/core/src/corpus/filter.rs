use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{detect_language, normalize_text, unique_word_count, Post, PostCollection};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub allowed_langs: BTreeSet<String>,
    pub min_unique_words: usize,
    pub drop_retweets: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            allowed_langs: ["en", "hi"].iter().map(|s| s.to_string()).collect(),
            min_unique_words: 4,
            drop_retweets: true,
        }
    }
}

/// Per-rule drop counts. Each dropped post is charged to the first rule it
/// fails, checked in the order retweet, language, unique words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub input: usize,
    pub retained: usize,
    pub retweets: usize,
    pub language: usize,
    pub too_few_words: usize,
}

impl FilterStats {
    pub fn dropped(&self) -> usize {
        self.retweets + self.language + self.too_few_words
    }
}

enum Verdict {
    Keep,
    Retweet,
    Language,
    TooFewWords,
}

fn judge(post: &Post, cfg: &FilterConfig) -> Verdict {
    if cfg.drop_retweets && post.is_retweet {
        return Verdict::Retweet;
    }
    let normalized = normalize_text(&post.text);
    let lang = match &post.lang {
        Some(l) => Some(l.to_ascii_lowercase()),
        None => detect_language(&normalized).map(str::to_string),
    };
    if !lang.is_some_and(|l| cfg.allowed_langs.contains(&l)) {
        return Verdict::Language;
    }
    if unique_word_count(&normalized) < cfg.min_unique_words {
        return Verdict::TooFewWords;
    }
    Verdict::Keep
}

/// Applies the retweet, language and unique-word rules, preserving order.
pub fn filter_posts(posts: &PostCollection, cfg: &FilterConfig) -> (PostCollection, FilterStats) {
    let mut stats = FilterStats {
        input: posts.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(posts.len());
    for post in posts {
        match judge(post, cfg) {
            Verdict::Keep => kept.push(post.clone()),
            Verdict::Retweet => stats.retweets += 1,
            Verdict::Language => stats.language += 1,
            Verdict::TooFewWords => stats.too_few_words += 1,
        }
    }
    stats.retained = kept.len();
    let kept = PostCollection::new(kept).expect("subset of a valid collection");
    (kept, stats)
}
