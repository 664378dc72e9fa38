use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Map, Value};

use crate::commands::{files, write_json, CliResult, Ctx};

/// Sections in report order: key, stage output file, stage name.
const SECTIONS: &[(&str, &str, &str)] = &[
    ("clusters", files::STATS, "cluster"),
    ("ropm", files::ROPM, "ropm"),
    ("communities", files::COMMUNITIES, "communities"),
    ("toxicity", files::TOXICITY, "toxicity"),
    ("timeline", files::TIMELINE, "timeline"),
];

/// Optional stage outputs included when present.
const EXTRAS: &[(&str, &str)] = &[
    ("ingest", files::INGEST),
    ("graph", files::GRAPH),
    ("screen", files::SCREEN),
    ("keywords", files::KEYWORDS),
    ("specious", files::SPECIOUS),
    ("evaluation", files::EVALUATION),
    ("sweep", files::SWEEP),
];

fn read(ctx: &Ctx, name: &str) -> CliResult<Option<Value>> {
    let p = ctx.path(name);
    if !p.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&p).map_err(|e| dupscan::Error::io(&p, e))?;
    let v = serde_json::from_str(&text).map_err(|e| dupscan::Error::format(&p, e.to_string()))?;
    Ok(Some(v))
}

fn clusters_section(v: &Value) -> Value {
    let c = &v["consistency"];
    json!({
        "params": v["params"],
        "stats": v["stats"],
        "min_cosine": c["min_cosine"],
        "mean_cosine": c["mean_cosine"],
        "n_sampled_clusters": c["n_sampled_clusters"],
    })
}

fn communities_section(v: &Value) -> Value {
    let p = &v["profile"];
    let top: Vec<Value> = p["communities"]
        .as_array()
        .map(|cs| {
            cs.iter()
                .map(|c| {
                    let members: Vec<&Value> = c["members"]
                        .as_array()
                        .map(|m| m.iter().take(5).collect())
                        .unwrap_or_default();
                    json!({
                        "community_id": c["community_id"],
                        "size": c["size"],
                        "dominant_party": c["dominant_party"],
                        "party_counts": c["party_counts"],
                        "top_members": members,
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    json!({
        "q": p["q"],
        "q_history": v["q_history"],
        "n_nodes": p["n_nodes"],
        "n_communities": p["n_communities"],
        "min_size": p["min_size"],
        "n_profiled": p["n_profiled"],
        "share_in_profiled": p["share_in_profiled"],
        "communities": top,
    })
}

fn toxicity_section(v: &Value) -> Value {
    json!({
        "threshold": v["threshold"],
        "n_clusters": v["n_clusters"],
        "n_scored": v["n_scored"],
        "n_unscored": v["n_unscored"],
        "n_toxic": v["n_toxic"],
        "rows": v["rows"],
    })
}

fn timeline_section(v: &Value) -> Value {
    let peak = v["days"].as_array().and_then(|days| {
        days.iter()
            .max_by(|a, b| {
                let (ca, cb) = (
                    a["count"].as_u64().unwrap_or(0),
                    b["count"].as_u64().unwrap_or(0),
                );
                // Earliest day wins ties.
                ca.cmp(&cb)
                    .then_with(|| b["date"].as_str().cmp(&a["date"].as_str()))
            })
            .cloned()
    });
    json!({
        "date_from": v["date_from"],
        "date_to": v["date_to"],
        "n_days": v["n_days"],
        "total": v["total"],
        "mean_per_day": v["mean_per_day"],
        "n_outside": v["n_outside"],
        "peak": peak,
        "days_file": files::TIMELINE_CSV,
    })
}

fn fmt(v: &Value) -> String {
    match v {
        Value::Null => "n/a".into(),
        Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn text(report: &Value) -> String {
    let mut s = String::from("dupscan report\n==============\n");
    for &(key, file, stage) in SECTIONS {
        let sec = &report["sections"][key];
        let _ = writeln!(s, "\n[{key}]");
        if sec["status"] == "absent" {
            let _ = writeln!(s, "absent: {file} not found (run `{stage}`)");
            continue;
        }
        let d = &sec["data"];
        match key {
            "clusters" => {
                let st = &d["stats"];
                for f in [
                    "n_clusters",
                    "mean_size",
                    "sd_size",
                    "max_size",
                    "n_ge_k",
                    "total_clustered_posts",
                    "n_noise",
                    "post_pairs",
                    "distinct_accounts",
                    "account_pairs",
                ] {
                    let _ = writeln!(s, "{f:<24}{}", fmt(&st[f]));
                }
                let _ = writeln!(s, "{:<24}{}", "min_cosine", fmt(&d["min_cosine"]));
                let _ = writeln!(s, "{:<24}{}", "mean_cosine", fmt(&d["mean_cosine"]));
            }
            "ropm" => {
                let _ = writeln!(
                    s,
                    "{:<14}{:>10}{:>12}{:>10}",
                    "detector", "tweets", "pairs", "accounts"
                );
                for r in d["rows"].as_array().into_iter().flatten() {
                    let _ = writeln!(
                        s,
                        "{:<14}{:>10}{:>12}{:>10}",
                        fmt(&r["detector"]),
                        fmt(&r["n_dup_tweets"]),
                        fmt(&r["n_pairs"]),
                        fmt(&r["n_accounts"])
                    );
                }
            }
            "communities" => {
                let _ = writeln!(
                    s,
                    "q {}  communities {}  nodes {}",
                    fmt(&d["q"]),
                    fmt(&d["n_communities"]),
                    fmt(&d["n_nodes"])
                );
                let _ = writeln!(
                    s,
                    "profiled (size >= {}) {}  share of accounts {}",
                    fmt(&d["min_size"]),
                    fmt(&d["n_profiled"]),
                    fmt(&d["share_in_profiled"])
                );
                for c in d["communities"].as_array().into_iter().flatten() {
                    let _ = writeln!(
                        s,
                        "  community {} size {} dominant {}",
                        fmt(&c["community_id"]),
                        fmt(&c["size"]),
                        fmt(&c["dominant_party"])
                    );
                }
            }
            "toxicity" => {
                let _ = writeln!(
                    s,
                    "clusters {}  scored {}  toxic {}  threshold {}",
                    fmt(&d["n_clusters"]),
                    fmt(&d["n_scored"]),
                    fmt(&d["n_toxic"]),
                    fmt(&d["threshold"])
                );
                let _ = writeln!(
                    s,
                    "{:<18}{:>10}{:>8}{:>8}",
                    "label", "clusters", "BJP", "INC"
                );
                for r in d["rows"].as_array().into_iter().flatten() {
                    let _ = writeln!(
                        s,
                        "{:<18}{:>10}{:>8}{:>8}",
                        fmt(&r["label"]),
                        fmt(&r["n_clusters"]),
                        fmt(&r["n_bjp"]),
                        fmt(&r["n_inc"])
                    );
                }
            }
            _ => {
                let _ = writeln!(
                    s,
                    "{} to {}: {} posts over {} days, mean {} per day",
                    fmt(&d["date_from"]),
                    fmt(&d["date_to"]),
                    fmt(&d["total"]),
                    fmt(&d["n_days"]),
                    fmt(&d["mean_per_day"])
                );
                if let Some(p) = d["peak"].as_object() {
                    let _ = writeln!(s, "peak {} with {}", fmt(&p["date"]), fmt(&p["count"]));
                }
            }
        }
    }
    let _ = writeln!(s, "\n[artifacts]");
    for a in report["artifacts"].as_array().into_iter().flatten() {
        let _ = writeln!(s, "{}", fmt(a));
    }
    s
}

pub fn report(ctx: &Ctx) -> CliResult<Value> {
    let mut sections = Map::new();
    let mut present = Vec::new();
    for &(key, file, stage) in SECTIONS {
        let sec = match read(ctx, file)? {
            Some(v) => {
                present.push(key);
                let data = match key {
                    "clusters" => clusters_section(&v),
                    "ropm" => json!({"rows": v["rows"], "sim_threshold": v["sim_threshold"]}),
                    "communities" => communities_section(&v),
                    "toxicity" => toxicity_section(&v),
                    _ => timeline_section(&v),
                };
                json!({"status": "present", "source": file, "data": data})
            }
            None => json!({"status": "absent", "source": file, "stage": stage}),
        };
        sections.insert(key.to_string(), sec);
    }
    let mut extras = Map::new();
    for &(key, file) in EXTRAS {
        if let Some(v) = read(ctx, file)? {
            extras.insert(key.to_string(), json!({"source": file, "data": v}));
        }
    }
    // Only files on disk now are listed; the report files themselves follow.
    let mut artifacts: Vec<String> = Vec::new();
    let mut stack = vec![ctx.out.clone()];
    while let Some(dir) = stack.pop() {
        let entries = fs::read_dir(&dir).map_err(|e| dupscan::Error::io(&dir, e))?;
        for e in entries {
            let p = e.map_err(|e| dupscan::Error::io(&dir, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(rel) = p.strip_prefix(&ctx.out) {
                let rel = rel.to_string_lossy().replace('\\', "/");
                if rel != files::REPORT_JSON && rel != files::REPORT_TXT {
                    artifacts.push(rel);
                }
            }
        }
    }
    artifacts.sort();
    let report = json!({
        "sections": sections,
        "extras": extras,
        "artifacts": artifacts,
    });
    write_json(&ctx.path(files::REPORT_JSON), &report)?;
    let p = ctx.path(files::REPORT_TXT);
    fs::write(&p, text(&report)).map_err(|e| dupscan::Error::io(&p, e))?;
    Ok(
        json!({"present": present, "absent": SECTIONS.len() - present.len(),
        "outputs": [files::REPORT_JSON, files::REPORT_TXT]}),
    )
}
