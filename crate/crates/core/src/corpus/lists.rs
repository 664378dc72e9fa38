use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

use log::warn;

use super::Party;
use crate::{Error, Result};

/// Non-empty, non-comment lines with their 1-based line numbers.
fn entries(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.to_string()))
        .collect())
}

/// One domain per line, lowercased; a leading `www.` is dropped.
pub fn load_domain_list(path: &Path) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for (line, raw) in entries(path)? {
        let d = raw.to_ascii_lowercase();
        let d = d.strip_prefix("www.").unwrap_or(&d).trim_end_matches('.');
        if d.is_empty() || d.contains(|c: char| c.is_whitespace() || c == '/' || c == ':') {
            warn!("{}:{line}: malformed domain {raw:?}", path.display());
            continue;
        }
        if !out.insert(d.to_string()) {
            warn!("{}:{line}: duplicate domain {d}", path.display());
        }
    }
    Ok(out)
}

/// One keyword per line, first occurrence order, case-insensitive dedup.
pub fn load_keywords(path: &Path) -> Result<Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, kw) in entries(path)? {
        if seen.insert(kw.to_lowercase()) {
            out.push(kw);
        } else {
            warn!("{}:{line}: duplicate keyword {kw:?}", path.display());
        }
    }
    Ok(out)
}

fn split_csv_line(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Lines `account_id,cap,rbs`; a non-numeric header line is ignored.
pub fn load_bot_scores(path: &Path) -> Result<BTreeMap<String, (f64, f64)>> {
    let mut out = BTreeMap::new();
    for (n, (line, raw)) in entries(path)?.into_iter().enumerate() {
        let fields = split_csv_line(&raw);
        let parsed = match fields.as_slice() {
            [id, cap, rbs] if !id.is_empty() => cap
                .parse::<f64>()
                .ok()
                .zip(rbs.parse::<f64>().ok())
                .map(|(c, r)| (id.to_string(), c, r)),
            _ => None,
        };
        match parsed {
            Some((id, c, r)) if (0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&r) => {
                if out.insert(id.clone(), (c, r)).is_some() {
                    warn!(
                        "{}:{line}: duplicate scores for {id}, keeping the last",
                        path.display()
                    );
                }
            }
            None if n == 0 => {}
            _ => warn!(
                "{}:{line}: malformed bot score line {raw:?}",
                path.display()
            ),
        }
    }
    Ok(out)
}

/// Lines `account_id,party` with party one of BJP, INC, OTHER.
pub fn load_party_labels(path: &Path) -> Result<BTreeMap<String, Party>> {
    let mut out = BTreeMap::new();
    for (n, (line, raw)) in entries(path)?.into_iter().enumerate() {
        let fields = split_csv_line(&raw);
        let parsed = match fields.as_slice() {
            [id, party] if !id.is_empty() => {
                party.parse::<Party>().ok().map(|p| (id.to_string(), p))
            }
            _ => None,
        };
        match parsed {
            Some((id, p)) => {
                if out.insert(id.clone(), p).is_some() {
                    warn!(
                        "{}:{line}: duplicate label for {id}, keeping the last",
                        path.display()
                    );
                }
            }
            None if n == 0 => {}
            None => warn!("{}:{line}: malformed party line {raw:?}", path.display()),
        }
    }
    Ok(out)
}
