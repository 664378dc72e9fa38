use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::LazyLock;

use chrono::{Days, NaiveDate};
use regex::Regex;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::corpus::{AccountCollection, Party, Post, PostCollection};
use crate::dupcluster::ClusterSet;
use crate::dupgraph::UNLABELED;
use crate::{Error, Result};

static TEXT_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bhttps?://\S+").unwrap());

/// Lowercases and drops a trailing dot and one leading `www.`.
pub fn normalize_host(host: &str) -> String {
    let h = host.trim().trim_end_matches('.').to_lowercase();
    match h.strip_prefix("www.") {
        Some(rest) => rest.to_string(),
        None => h,
    }
}

/// Host of `raw`, retried with an `http://` prefix when the scheme is
/// missing. `None` when neither parse yields a host.
pub fn url_host(raw: &str) -> Option<String> {
    let raw = raw.trim();
    let parsed = match Url::parse(raw) {
        Ok(u) => Some(u),
        Err(url::ParseError::RelativeUrlWithoutBase) => Url::parse(&format!("http://{raw}")).ok(),
        Err(_) => None,
    }?;
    let host = parsed.host_str()?;
    let host = host.trim_start_matches('[').trim_end_matches(']');
    (!host.is_empty()).then(|| normalize_host(host))
}

/// Listed domain, or a subdomain of one at a dot boundary.
pub fn host_matches<'a>(host: &str, domains: &'a BTreeSet<String>) -> Option<&'a str> {
    let mut h = host;
    loop {
        if let Some(d) = domains.get(h) {
            return Some(d.as_str());
        }
        h = &h[h.find('.')? + 1..];
    }
}

fn post_urls(p: &Post) -> BTreeSet<&str> {
    p.urls
        .iter()
        .map(String::as_str)
        .chain(TEXT_URL.find_iter(&p.text).map(|m| m.as_str()))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeciousReport {
    pub n_posts: usize,
    pub n_urls: usize,
    pub n_unparseable: usize,
    pub n_flagged_tweets: usize,
    pub n_flagged_clusters: usize,
    pub n_flagged_accounts: usize,
    /// Flagged accounts per party label plus `unlabeled`.
    pub accounts_by_party: BTreeMap<String, usize>,
    /// Flagged tweets per matched listed domain.
    pub tweets_by_domain: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpeciousMatch {
    pub report: SpeciousReport,
    /// Flagged post ids, ascending.
    pub flagged: Vec<String>,
}

/// Flags posts linking to a listed domain; URLs come from the post's URL
/// list and from links in its text. Unparseable URLs are counted and
/// skipped.
pub fn match_specious(
    posts: &PostCollection,
    clusters: Option<&ClusterSet>,
    domains: &BTreeSet<String>,
    accounts: &AccountCollection,
) -> SpeciousMatch {
    let mut r = SpeciousReport {
        n_posts: posts.len(),
        ..Default::default()
    };
    let mut flagged = BTreeSet::new();
    let mut flagged_accounts = BTreeSet::new();
    for p in posts {
        let mut hit: BTreeSet<&str> = BTreeSet::new();
        for u in post_urls(p) {
            r.n_urls += 1;
            match url_host(u) {
                Some(h) => {
                    if let Some(d) = host_matches(&h, domains) {
                        hit.insert(d);
                    }
                }
                None => r.n_unparseable += 1,
            }
        }
        if !hit.is_empty() {
            flagged.insert(p.id.as_str());
            flagged_accounts.insert(p.account_id.as_str());
            for d in hit {
                *r.tweets_by_domain.entry(d.to_string()).or_default() += 1;
            }
        }
    }
    r.n_flagged_tweets = flagged.len();
    r.n_flagged_accounts = flagged_accounts.len();
    r.n_flagged_clusters = clusters.map_or(0, |cs| {
        cs.clusters
            .iter()
            .filter(|c| c.members.iter().any(|m| flagged.contains(m.as_str())))
            .count()
    });
    for p in Party::ALL {
        r.accounts_by_party.insert(p.as_str().to_string(), 0);
    }
    r.accounts_by_party.insert(UNLABELED.to_string(), 0);
    for a in &flagged_accounts {
        let key = accounts.party_of(a).map_or(UNLABELED, Party::as_str);
        *r.accounts_by_party
            .get_mut(key)
            .expect("key inserted above") += 1;
    }
    SpeciousMatch {
        report: r,
        flagged: flagged.into_iter().map(str::to_string).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayCount {
    pub date: NaiveDate,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineReport {
    pub date_from: NaiveDate,
    pub date_to: NaiveDate,
    pub n_days: usize,
    pub total: usize,
    pub mean_per_day: f64,
    /// Posts dated outside the range.
    pub n_outside: usize,
    pub days: Vec<DayCount>,
}

impl TimelineReport {
    /// `date,count`, one row per day.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["date", "count"])?;
        for d in &self.days {
            w.write_record([d.date.to_string(), d.count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Zero-filled UTC daily counts over the inclusive range.
pub fn specious_timeline<'a>(
    flagged: impl IntoIterator<Item = &'a Post>,
    date_from: NaiveDate,
    date_to: NaiveDate,
) -> Result<TimelineReport> {
    if date_from > date_to {
        return Err(Error::InvalidArgument(format!(
            "timeline range starts {date_from} after it ends {date_to}"
        )));
    }
    let n_days = (date_to - date_from).num_days() as usize + 1;
    let mut counts = vec![0usize; n_days];
    let mut n_outside = 0;
    for p in flagged {
        let d = p.timestamp.date_naive();
        if d < date_from || d > date_to {
            n_outside += 1;
        } else {
            counts[(d - date_from).num_days() as usize] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let days = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| DayCount {
            date: date_from + Days::new(i as u64),
            count,
        })
        .collect();
    Ok(TimelineReport {
        date_from,
        date_to,
        n_days,
        total,
        mean_per_day: total as f64 / n_days as f64,
        n_outside,
        days,
    })
}
