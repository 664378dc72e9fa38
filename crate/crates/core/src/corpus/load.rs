use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{timestamp_format, Account, AccountCollection, Party, Post, PostCollection};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PostFormat {
    Jsonl,
    Csv,
}

impl PostFormat {
    /// `.csv` is CSV, anything else JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => PostFormat::Csv,
            _ => PostFormat::Jsonl,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub loaded: usize,
    pub skipped: usize,
}

#[derive(Deserialize)]
struct RawPost {
    id: Option<String>,
    account_id: Option<String>,
    timestamp: Option<String>,
    text: Option<String>,
    #[serde(default)]
    urls: Option<Vec<String>>,
    #[serde(default)]
    is_retweet: Option<bool>,
    #[serde(default)]
    lang: Option<String>,
}

impl RawPost {
    fn into_post(self) -> std::result::Result<Post, String> {
        let id = self.id.filter(|s| !s.is_empty()).ok_or("missing id")?;
        let account_id = self.account_id.ok_or("missing account_id")?;
        let ts = self.timestamp.ok_or("missing timestamp")?;
        let text = self.text.ok_or("missing text")?;
        Ok(Post {
            id,
            account_id,
            timestamp: timestamp_format::parse(&ts)?,
            text,
            urls: self.urls.unwrap_or_default(),
            is_retweet: self.is_retweet.unwrap_or(false),
            lang: self.lang.filter(|l| !l.is_empty()),
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "false" | "0" | "no" => Some(false),
        "true" | "1" | "yes" => Some(true),
        _ => None,
    }
}

/// Loads posts from JSONL or CSV. Malformed records and repeated ids are
/// skipped with a warning and counted.
///
/// CSV columns: `id,account_id,timestamp,text,urls,is_retweet,lang` with
/// `urls` space-separated.
pub fn load_posts(path: &Path, format: PostFormat) -> Result<(PostCollection, LoadStats)> {
    let raws: Vec<(usize, std::result::Result<RawPost, String>)> = match format {
        PostFormat::Jsonl => read_jsonl_rows(path)?,
        PostFormat::Csv => read_csv_posts(path)?,
    };

    let mut stats = LoadStats::default();
    let mut seen = std::collections::HashSet::new();
    let mut posts = Vec::new();
    for (line, raw) in raws {
        match raw.and_then(RawPost::into_post) {
            Ok(p) if seen.insert(p.id.clone()) => posts.push(p),
            Ok(p) => {
                warn!("{}:{line}: duplicate post id {}", path.display(), p.id);
                stats.skipped += 1;
            }
            Err(msg) => {
                warn!("{}:{line}: {msg}", path.display());
                stats.skipped += 1;
            }
        }
    }
    stats.loaded = posts.len();
    Ok((PostCollection::new(posts)?, stats))
}

fn read_jsonl_rows(path: &Path) -> Result<Vec<(usize, std::result::Result<RawPost, String>)>> {
    let reader = BufReader::new(open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push((
            i + 1,
            serde_json::from_str::<RawPost>(&line).map_err(|e| e.to_string()),
        ));
    }
    Ok(rows)
}

fn read_csv_posts(path: &Path) -> Result<Vec<(usize, std::result::Result<RawPost, String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols = [
        col("id"),
        col("account_id"),
        col("timestamp"),
        col("text"),
        col("urls"),
        col("is_retweet"),
        col("lang"),
    ];
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                rows.push((line, Err(e.to_string())));
                continue;
            }
        };
        let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).map(str::to_string);
        let retweet = match field(cols[5]) {
            None => Ok(None),
            Some(s) => parse_bool(&s)
                .map(Some)
                .ok_or(format!("bad is_retweet {s:?}")),
        };
        let raw = retweet.map(|is_retweet| RawPost {
            id: field(cols[0]),
            account_id: field(cols[1]),
            timestamp: field(cols[2]),
            text: field(cols[3]),
            urls: field(cols[4]).map(|s| s.split_whitespace().map(str::to_string).collect()),
            is_retweet,
            lang: field(cols[6]),
        });
        rows.push((line, raw));
    }
    Ok(rows)
}

pub fn write_posts_jsonl<'a>(path: &Path, posts: impl IntoIterator<Item = &'a Post>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in posts {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_unit(s: &str, what: &str) -> std::result::Result<Option<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("bad {what} {s:?}"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{what} {v} outside [0, 1]"));
    }
    Ok(Some(v))
}

fn parse_account(
    rec: &csv::StringRecord,
    cols: &[Option<usize>; 6],
) -> std::result::Result<Account, String> {
    let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).unwrap_or("").trim();
    let id = field(cols[0]);
    if id.is_empty() {
        return Err("missing id".into());
    }
    let verified = parse_bool(field(cols[2])).ok_or("bad verified flag")?;
    let party = match field(cols[5]) {
        "" => None,
        p => Some(p.parse::<Party>().map_err(|e| e.to_string())?),
    };
    let handle = field(cols[1]);
    Ok(Account {
        id: id.to_string(),
        handle: if handle.is_empty() {
            id.to_string()
        } else {
            handle.to_string()
        },
        verified,
        cap: parse_unit(field(cols[3]), "cap")?,
        rbs: parse_unit(field(cols[4]), "rbs")?,
        party,
    })
}

/// Loads `id,handle,verified,cap,rbs,party`; optional fields may be empty.
pub fn load_accounts(path: &Path) -> Result<(AccountCollection, LoadStats)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols = [
        col("id"),
        col("handle"),
        col("verified"),
        col("cap"),
        col("rbs"),
        col("party"),
    ];
    if cols[0].is_none() && !headers.is_empty() {
        return Err(Error::format(path, "account CSV needs an `id` column"));
    }
    let mut stats = LoadStats::default();
    let mut accounts = AccountCollection::default();
    for (i, rec) in rdr.records().enumerate() {
        let parsed = rec
            .map_err(|e| e.to_string())
            .and_then(|r| parse_account(&r, &cols));
        match parsed {
            Ok(a) => {
                let id = a.id.clone();
                if !accounts.insert(a) {
                    warn!("{}:{}: duplicate account {id}", path.display(), i + 2);
                    stats.skipped += 1;
                }
            }
            Err(msg) => {
                warn!("{}:{}: {msg}", path.display(), i + 2);
                stats.skipped += 1;
            }
        }
    }
    stats.loaded = accounts.len();
    Ok((accounts, stats))
}

pub fn write_accounts_csv<'a>(
    path: &Path,
    accounts: impl IntoIterator<Item = &'a Account>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["id", "handle", "verified", "cap", "rbs", "party"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for a in accounts {
        w.write_record([
            a.id.as_str(),
            a.handle.as_str(),
            if a.verified { "true" } else { "false" },
            &opt(a.cap),
            &opt(a.rbs),
            a.party.map(Party::as_str).unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
