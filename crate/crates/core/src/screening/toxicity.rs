use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, AccountCollection, Party, PostCollection};
use crate::dupcluster::ClusterSet;
use crate::{Error, Result};

pub const DEFAULT_TOX_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Toxicity,
    SevereToxicity,
    IdentityAttack,
    Threat,
    Insult,
    Profanity,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Toxicity,
        Dimension::SevereToxicity,
        Dimension::IdentityAttack,
        Dimension::Threat,
        Dimension::Insult,
        Dimension::Profanity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Toxicity => "toxicity",
            Dimension::SevereToxicity => "severe_toxicity",
            Dimension::IdentityAttack => "identity_attack",
            Dimension::Threat => "threat",
            Dimension::Insult => "insult",
            Dimension::Profanity => "profanity",
        }
    }

    /// Attribute name on the scoring service wire.
    pub fn attribute(self) -> &'static str {
        match self {
            Dimension::Toxicity => "TOXICITY",
            Dimension::SevereToxicity => "SEVERE_TOXICITY",
            Dimension::IdentityAttack => "IDENTITY_ATTACK",
            Dimension::Threat => "THREAT",
            Dimension::Insult => "INSULT",
            Dimension::Profanity => "PROFANITY",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s) || d.attribute().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown toxicity dimension {s:?}")))
    }
}

/// One score in [0, 1] per dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ToxicityScores {
    pub toxicity: f64,
    pub severe_toxicity: f64,
    pub identity_attack: f64,
    pub threat: f64,
    pub insult: f64,
    pub profanity: f64,
}

impl ToxicityScores {
    pub fn get(&self, d: Dimension) -> f64 {
        match d {
            Dimension::Toxicity => self.toxicity,
            Dimension::SevereToxicity => self.severe_toxicity,
            Dimension::IdentityAttack => self.identity_attack,
            Dimension::Threat => self.threat,
            Dimension::Insult => self.insult,
            Dimension::Profanity => self.profanity,
        }
    }

    pub fn set(&mut self, d: Dimension, v: f64) {
        let slot = match d {
            Dimension::Toxicity => &mut self.toxicity,
            Dimension::SevereToxicity => &mut self.severe_toxicity,
            Dimension::IdentityAttack => &mut self.identity_attack,
            Dimension::Threat => &mut self.threat,
            Dimension::Insult => &mut self.insult,
            Dimension::Profanity => &mut self.profanity,
        };
        *slot = v;
    }

    pub fn validate(&self) -> Result<()> {
        for d in Dimension::ALL {
            let v = self.get(d);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{d} score {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Dimensions scoring strictly above `threshold`.
    pub fn labels(&self, threshold: f64) -> Vec<Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(|&d| self.get(d) > threshold)
            .collect()
    }
}

pub trait ToxicityScorer: Sync {
    fn score(&self, text: &str) -> Result<ToxicityScores>;

    /// Scores in input order; one failure does not affect other texts.
    fn score_batch(&self, texts: &[String]) -> Vec<Result<ToxicityScores>> {
        texts.iter().map(|t| self.score(t)).collect()
    }
}

/// Deterministic stand-in for the scoring service: per dimension,
/// `1 − exp(−Σ w)` over every case-folded token occurrence found in the
/// lexicon.
#[derive(Clone, Debug, Default)]
pub struct LexiconScorer {
    terms: HashMap<String, Vec<(Dimension, f64)>>,
}

const BUILTIN_LEXICON: &str = include_str!("../../data/toxicity_lexicon.csv");

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl LexiconScorer {
    /// Parses `term,dimension,weight` rows after a header line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut terms: HashMap<String, Vec<(Dimension, f64)>> = HashMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let (Some(term), Some(dim), Some(w)) = (rec.get(0), rec.get(1), rec.get(2)) else {
                return Err(Error::InvalidArgument(
                    "lexicon rows need term,dimension,weight".into(),
                ));
            };
            let mut toks: Vec<String> = tokens(term).collect();
            if toks.len() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "lexicon term {term:?} is not a single token"
                )));
            }
            let dim: Dimension = dim.parse()?;
            let w: f64 = w
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| Error::InvalidArgument(format!("bad weight {w:?} for {term:?}")))?;
            terms.entry(toks.remove(0)).or_default().push((dim, w));
        }
        Ok(Self { terms })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("builtin lexicon parses")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lexicon_score(&self, text: &str) -> ToxicityScores {
        let mut sums = [0.0f64; 6];
        for tok in tokens(text) {
            if let Some(entries) = self.terms.get(&tok) {
                for &(d, w) in entries {
                    sums[d.index()] += w;
                }
            }
        }
        let mut s = ToxicityScores::default();
        for d in Dimension::ALL {
            s.set(d, 1.0 - (-sums[d.index()]).exp());
        }
        s
    }
}

impl ToxicityScorer for LexiconScorer {
    fn score(&self, text: &str) -> Result<ToxicityScores> {
        Ok(self.lexicon_score(text))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterToxicity {
    pub cluster_id: usize,
    pub post_id: String,
    /// `None` when the scorer failed for this cluster.
    pub scores: Option<ToxicityScores>,
    pub labels: Vec<Dimension>,
}

/// Clusters carrying a label, overall and for clusters with at least one
/// member account of each party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub label: String,
    pub n_clusters: usize,
    pub n_bjp: usize,
    pub n_inc: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToxicityReport {
    pub threshold: f64,
    pub seed: u64,
    pub n_clusters: usize,
    pub n_scored: usize,
    pub n_unscored: usize,
    /// Clusters with at least one label.
    pub n_toxic: usize,
    pub rows: Vec<LabelRow>,
    pub clusters: Vec<ClusterToxicity>,
}

impl ToxicityReport {
    /// `label,n_clusters,n_bjp,n_inc`.
    pub fn write_table_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["label", "n_clusters", "n_bjp", "n_inc"])?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.n_clusters.to_string(),
                r.n_bjp.to_string(),
                r.n_inc.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Scores one seeded, uniformly drawn representative post per cluster on
/// its normalized text.
pub fn score_toxicity<S: ToxicityScorer + ?Sized>(
    clusters: &ClusterSet,
    posts: &PostCollection,
    accounts: &AccountCollection,
    scorer: &S,
    seed: u64,
    threshold: f64,
) -> Result<ToxicityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps = Vec::with_capacity(clusters.len());
    let mut texts = Vec::with_capacity(clusters.len());
    for c in &clusters.clusters {
        let pick = &c.members[rng.random_range(0..c.size())];
        let post = posts.get(pick).ok_or_else(|| {
            Error::InvalidArgument(format!("clustered post {pick} not in corpus"))
        })?;
        reps.push(pick.clone());
        texts.push(normalize_text(&post.text));
    }
    let results = scorer.score_batch(&texts);

    let mut rows: BTreeMap<Dimension, LabelRow> = Dimension::ALL
        .into_iter()
        .map(|d| {
            (
                d,
                LabelRow {
                    label: d.as_str().to_string(),
                    n_clusters: 0,
                    n_bjp: 0,
                    n_inc: 0,
                },
            )
        })
        .collect();
    let mut out = Vec::with_capacity(clusters.len());
    let (mut n_unscored, mut n_toxic) = (0, 0);
    for ((c, post_id), res) in clusters.clusters.iter().zip(reps).zip(results) {
        let scores = match res.and_then(|s| s.validate().map(|_| s)) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("cluster {} unscored: {e}", c.cluster_id);
                n_unscored += 1;
                None
            }
        };
        let labels = scores.map(|s| s.labels(threshold)).unwrap_or_default();
        if !labels.is_empty() {
            n_toxic += 1;
            let parties: Vec<Party> = c
                .members
                .iter()
                .filter_map(|m| posts.get(m).and_then(|p| accounts.party_of(&p.account_id)))
                .collect();
            let (bjp, inc) = (parties.contains(&Party::Bjp), parties.contains(&Party::Inc));
            for d in &labels {
                let row = rows.get_mut(d).expect("all dimensions present");
                row.n_clusters += 1;
                row.n_bjp += bjp as usize;
                row.n_inc += inc as usize;
            }
        }
        out.push(ClusterToxicity {
            cluster_id: c.cluster_id,
            post_id,
            scores,
            labels,
        });
    }
    Ok(ToxicityReport {
        threshold,
        seed,
        n_clusters: clusters.len(),
        n_scored: clusters.len() - n_unscored,
        n_unscored,
        n_toxic,
        rows: rows.into_values().collect(),
        clusters: out,
    })
}
