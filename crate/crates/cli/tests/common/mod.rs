#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    /// The one-line stdout summary.
    pub fn summary(&self) -> Value {
        serde_json::from_str(self.stdout.trim()).unwrap_or(Value::Null)
    }
}

pub fn dupscan(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_dupscan"))
        .args(args)
        .env_remove("EMBED_API_KEY")
        .env_remove("TOX_API_KEY")
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs `args` with `--out dir --seed seed` appended; panics on failure.
pub fn step(dir: &Path, seed: u64, args: &[&str]) -> Value {
    let d = dir.to_str().unwrap();
    let s = seed.to_string();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", d, "--seed", &s]);
    let o = dupscan(&all);
    assert_eq!(o.code, 0, "{args:?} failed: {}\n{}", o.stdout, o.stderr);
    o.summary()
}

/// synth → ingest → embed → cluster → ropm → graph → communities → screen →
/// toxicity → specious → timeline → evaluate → report.
pub fn full_pipeline(dir: &Path, seed: u64, synth_args: &[&str]) {
    let synth = dir.join("synth");
    let p = |f: &str| synth.join(f).to_str().unwrap().to_string();
    let mut s = vec!["synth"];
    s.extend_from_slice(synth_args);
    step(dir, seed, &s);
    step(
        dir,
        seed,
        &[
            "ingest",
            "--posts",
            &p("posts.jsonl"),
            "--accounts",
            &p("accounts.csv"),
        ],
    );
    step(dir, seed, &["embed"]);
    step(dir, seed, &["cluster", "--eps", "1.0", "--min-pts", "2"]);
    step(dir, seed, &["ropm", "--window", "10,100"]);
    step(dir, seed, &["graph", "--min-shared", "2"]);
    step(dir, seed, &["communities", "--min-size", "3"]);
    step(dir, seed, &["screen", "--keywords", &p("keywords.txt")]);
    step(dir, seed, &["toxicity"]);
    step(dir, seed, &["specious", "--domains", &p("domains.txt")]);
    step(dir, seed, &["timeline", "--domains", &p("domains.txt")]);
    step(dir, seed, &["evaluate"]);
    step(dir, seed, &["report"]);
}

/// Relative path to file bytes for every file under `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}
