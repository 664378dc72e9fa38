//! Posts, accounts and auxiliary lists, plus the text rules every later
//! stage relies on.

mod filter;
mod lists;
mod load;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use filter::{filter_posts, FilterConfig, FilterStats};
pub use lists::{load_bot_scores, load_domain_list, load_keywords, load_party_labels};
pub use load::{
    load_accounts, load_posts, write_accounts_csv, write_posts_jsonl, LoadStats, PostFormat,
};
pub use text::{detect_language, normalize_text, unique_word_count};

/// One social-media message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub account_id: String,
    #[serde(with = "timestamp_format")]
    pub timestamp: DateTime<Utc>,
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub is_retweet: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

/// Posts with unique ids, in load order.
#[derive(Clone, Debug, Default)]
pub struct PostCollection {
    posts: Vec<Post>,
    index: HashMap<String, usize>,
}

impl PostCollection {
    pub fn new(posts: Vec<Post>) -> Result<Self> {
        let mut index = HashMap::with_capacity(posts.len());
        for (i, p) in posts.iter().enumerate() {
            if p.id.is_empty() {
                return Err(Error::InvalidArgument(format!("post #{i} has an empty id")));
            }
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate post id {}",
                    p.id
                )));
            }
        }
        Ok(Self { posts, index })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Post> {
        self.posts.iter()
    }

    pub fn as_slice(&self) -> &[Post] {
        &self.posts
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.index.get(id).map(|&i| &self.posts[i])
    }

    /// Post id to account id.
    pub fn account_map(&self) -> HashMap<String, String> {
        self.posts
            .iter()
            .map(|p| (p.id.clone(), p.account_id.clone()))
            .collect()
    }

    pub fn into_vec(self) -> Vec<Post> {
        self.posts
    }
}

impl<'a> IntoIterator for &'a PostCollection {
    type Item = &'a Post;
    type IntoIter = std::slice::Iter<'a, Post>;

    fn into_iter(self) -> Self::IntoIter {
        self.posts.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    #[serde(rename = "BJP")]
    Bjp,
    #[serde(rename = "INC")]
    Inc,
    #[serde(rename = "OTHER")]
    Other,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Bjp, Party::Inc, Party::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Party::Bjp => "BJP",
            Party::Inc => "INC",
            Party::Other => "OTHER",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BJP" => Ok(Party::Bjp),
            "INC" => Ok(Party::Inc),
            "OTHER" => Ok(Party::Other),
            other => Err(Error::InvalidArgument(format!("unknown party {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub id: String,
    pub handle: String,
    pub verified: bool,
    /// Complete automation probability.
    pub cap: Option<f64>,
    /// Raw bot score.
    pub rbs: Option<f64>,
    pub party: Option<Party>,
}

impl Account {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            handle: id.clone(),
            id,
            verified: false,
            cap: None,
            rbs: None,
            party: None,
        }
    }
}

/// Accounts with unique ids, in load order.
#[derive(Clone, Debug, Default)]
pub struct AccountCollection {
    accounts: Vec<Account>,
    index: HashMap<String, usize>,
}

impl AccountCollection {
    /// Builds a collection; later duplicates of an id are dropped.
    pub fn new(accounts: Vec<Account>) -> Self {
        let mut out = Self::default();
        for a in accounts {
            out.insert(a);
        }
        out
    }

    /// Returns false when the id was already present.
    pub fn insert(&mut self, account: Account) -> bool {
        if self.index.contains_key(&account.id) {
            return false;
        }
        self.index.insert(account.id.clone(), self.accounts.len());
        self.accounts.push(account);
        true
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Account> {
        self.accounts.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Account> {
        self.index.get(id).map(|&i| &self.accounts[i])
    }

    pub fn party_of(&self, id: &str) -> Option<Party> {
        self.get(id).and_then(|a| a.party)
    }

    /// Overwrites CAP/RBS for known accounts; returns how many ids were unknown.
    pub fn apply_bot_scores(
        &mut self,
        scores: &std::collections::BTreeMap<String, (f64, f64)>,
    ) -> usize {
        let mut unknown = 0;
        for (id, &(cap, rbs)) in scores {
            match self.index.get(id) {
                Some(&i) => {
                    self.accounts[i].cap = Some(cap);
                    self.accounts[i].rbs = Some(rbs);
                }
                None => unknown += 1,
            }
        }
        unknown
    }

    /// Overwrites party labels for known accounts; returns how many ids were unknown.
    pub fn apply_party_labels(
        &mut self,
        labels: &std::collections::BTreeMap<String, Party>,
    ) -> usize {
        let mut unknown = 0;
        for (id, &party) in labels {
            match self.index.get(id) {
                Some(&i) => self.accounts[i].party = Some(party),
                None => unknown += 1,
            }
        }
        unknown
    }
}

impl<'a> IntoIterator for &'a AccountCollection {
    type Item = &'a Account;
    type IntoIter = std::slice::Iter<'a, Account>;

    fn into_iter(self) -> Self::IntoIter {
        self.accounts.iter()
    }
}

/// `YYYY-MM-DDTHH:MM:SSZ`, second resolution, within [1970, 2100).
pub mod timestamp_format {
    use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn format(ts: &DateTime<Utc>) -> String {
        ts.format(FORMAT).to_string()
    }

    pub fn parse(s: &str) -> Result<DateTime<Utc>, String> {
        let ts = match NaiveDateTime::parse_from_str(s, FORMAT) {
            Ok(naive) => Utc.from_utc_datetime(&naive),
            Err(_) => DateTime::parse_from_rfc3339(s)
                .map_err(|e| format!("bad timestamp {s:?}: {e}"))?
                .with_timezone(&Utc),
        };
        let secs = ts.timestamp();
        // 2100-01-01T00:00:00Z
        if !(0..4_102_444_800).contains(&secs) {
            return Err(format!("timestamp {s:?} outside [1970, 2100)"));
        }
        Ok(Utc.timestamp_opt(secs, 0).unwrap())
    }

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}
