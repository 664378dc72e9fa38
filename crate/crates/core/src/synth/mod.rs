//! Synthetic corpora with planted duplication campaigns, account personas
//! and ground truth, plus planted graphs and point clouds for the
//! clustering and community kernels.

mod evaluate;
mod graphs;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Timelike, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Geometric};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    normalize_text, write_accounts_csv, write_posts_jsonl, Account, AccountCollection, Party, Post,
    PostCollection,
};
use crate::dupcluster::ClusterSet;
use crate::embed::{cosine, HashedNgram};
use crate::screening::LexiconScorer;
use crate::{Error, Result};

pub use evaluate::{evaluate_groups, EvalReport};
pub use graphs::{clustered_points, planted_block_graph};
use text::{random_token, sample_words, vocabulary, Script, Template};

/// The enumerable part of the controversial-topic keyword list, shipped as a
/// sample input.
pub const SAMPLE_KEYWORDS: &str = include_str!("../../data/keywords_sample.txt");

pub fn sample_keywords() -> Vec<String> {
    SAMPLE_KEYWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Lexicon terms planted into toxic campaigns; each alone scores above 0.5
/// on at least one dimension of the built-in lexicon.
const TOXIC_TERMS: &[&str] = &[
    "idiot",
    "idiots",
    "moron",
    "morons",
    "scum",
    "vermin",
    "parasites",
    "damn",
    "crap",
    "bastard",
    "bastards",
    "kill",
    "shoot",
    "exterminate",
    "butcher",
];

const BENIGN_HOSTS: &[&str] = &[
    "news.example.org",
    "video.example.com",
    "photos.example.net",
    "blog.example.io",
];
const TLDS: &[&str] = &["com", "in", "net", "org", "news", "info"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_accounts: usize,
    pub n_campaigns: usize,
    /// Mean posts per campaign; sizes are 2 + geometric, so at least 2.
    pub campaign_size_mean: f64,
    /// Per-character perturbation probability for campaign copies.
    pub mutation_rate: f64,
    /// Probability of each removable decoration (leading mention, trailing
    /// short link) on a campaign copy.
    pub decoration_rate: f64,
    /// Unique filler posts that pass the corpus filter.
    pub noise_posts: usize,
    /// Filler the corpus filter removes.
    pub n_retweets: usize,
    pub n_foreign: usize,
    pub n_short: usize,
    pub n_groups: usize,
    pub group_size: usize,
    /// Chance that a campaign copy comes from the campaign's group.
    pub in_group_prob: f64,
    /// Party probabilities (BJP, INC, OTHER) for ungrouped accounts; the
    /// remainder is unlabeled.
    pub party_probs: [f64; 3],
    /// Party probabilities for groups.
    pub group_party_probs: [f64; 3],
    /// Chance that a member carries its group's party label.
    pub group_label_rate: f64,
    pub bot_fraction: f64,
    pub verified_fraction: f64,
    pub score_missing_rate: f64,
    /// Fraction of campaigns whose copies link to a specious domain.
    pub specious_link_rate: f64,
    pub toxic_campaign_fraction: f64,
    pub keyword_campaign_fraction: f64,
    pub hindi_campaign_fraction: f64,
    /// Chance that a non-specious post carries a benign link.
    pub benign_link_rate: f64,
    pub n_specious_domains: usize,
    pub date_from: NaiveDate,
    /// Inclusive.
    pub date_to: NaiveDate,
    /// Human copies of a campaign spread over this many days.
    pub campaign_spread_days: f64,
    /// Bot copies follow the campaign start after exponential delays with
    /// this mean.
    pub bot_burst_minutes: f64,
    pub max_posts_per_account: usize,
    pub keywords: Vec<String>,
    /// Embedder used to compute the planted cosine floor.
    pub embed_dim: usize,
    pub embed_seed: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_accounts: 1000,
            n_campaigns: 200,
            campaign_size_mean: 3.0,
            mutation_rate: 0.01,
            decoration_rate: 0.5,
            noise_posts: 1000,
            n_retweets: 50,
            n_foreign: 50,
            n_short: 50,
            n_groups: 8,
            group_size: 20,
            in_group_prob: 0.85,
            party_probs: [0.3, 0.2, 0.05],
            group_party_probs: [0.6, 0.25, 0.05],
            group_label_rate: 0.8,
            bot_fraction: 0.008,
            verified_fraction: 0.02,
            score_missing_rate: 0.05,
            specious_link_rate: 0.3,
            toxic_campaign_fraction: 0.1,
            keyword_campaign_fraction: 0.2,
            hindi_campaign_fraction: 0.1,
            benign_link_rate: 0.3,
            n_specious_domains: 20,
            date_from: NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
            date_to: NaiveDate::from_ymd_opt(2023, 2, 15).unwrap(),
            campaign_spread_days: 7.0,
            bot_burst_minutes: 20.0,
            max_posts_per_account: 3200,
            keywords: sample_keywords(),
            embed_dim: crate::embed::DEFAULT_DIM,
            embed_seed: 0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        for (name, p) in [
            ("mutation_rate", self.mutation_rate),
            ("decoration_rate", self.decoration_rate),
            ("in_group_prob", self.in_group_prob),
            ("group_label_rate", self.group_label_rate),
            ("bot_fraction", self.bot_fraction),
            ("verified_fraction", self.verified_fraction),
            ("score_missing_rate", self.score_missing_rate),
            ("specious_link_rate", self.specious_link_rate),
            ("toxic_campaign_fraction", self.toxic_campaign_fraction),
            ("keyword_campaign_fraction", self.keyword_campaign_fraction),
            ("hindi_campaign_fraction", self.hindi_campaign_fraction),
            ("benign_link_rate", self.benign_link_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        for (name, ps) in [
            ("party_probs", self.party_probs),
            ("group_party_probs", self.group_party_probs),
        ] {
            if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || ps.iter().sum::<f64>() > 1.0 + 1e-12 {
                return bad(format!("{name} must be probabilities summing to at most 1"));
            }
        }
        if !(self.campaign_size_mean >= 2.0 && self.campaign_size_mean.is_finite()) {
            return bad(format!(
                "campaign_size_mean must be at least 2, got {}",
                self.campaign_size_mean
            ));
        }
        if self.date_from > self.date_to {
            return bad("date_from is after date_to".into());
        }
        if !(self.campaign_spread_days >= 0.0 && self.bot_burst_minutes >= 0.0) {
            return bad("time spreads must be non-negative".into());
        }
        if self.max_posts_per_account == 0 {
            return bad("max_posts_per_account must be positive".into());
        }
        if self.keyword_campaign_fraction > 0.0 && self.n_campaigns > 0 && self.keywords.is_empty()
        {
            return bad("keyword campaigns requested without keywords".into());
        }
        if self.specious_link_rate > 0.0 && self.n_campaigns > 0 && self.n_specious_domains == 0 {
            return bad("specious campaigns requested without specious domains".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub bot: bool,
    pub verified: bool,
    pub party: Option<Party>,
    pub group: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignTruth {
    pub size: usize,
    pub group: usize,
    pub hindi: bool,
    pub toxic_term: Option<String>,
    pub keyword: Option<String>,
    pub specious_domain: Option<String>,
    /// Minimum cosine between embedded copies.
    pub cosine_floor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub post_campaign: BTreeMap<String, Option<String>>,
    pub personas: BTreeMap<String, Persona>,
    pub campaigns: BTreeMap<String, CampaignTruth>,
    /// Posts linking to a specious domain, per UTC day.
    pub specious_daily: BTreeMap<NaiveDate, usize>,
    /// Minimum over campaigns of the within-campaign cosine floor.
    pub cosine_floor: Option<f64>,
}

impl GroundTruth {
    /// `{"post_id", "campaign_id"}` per line, ascending post id.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            post_id: &'a str,
            campaign_id: Option<&'a str>,
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (p, c) in &self.post_campaign {
            serde_json::to_writer(
                &mut w,
                &Row {
                    post_id: p,
                    campaign_id: c.as_deref(),
                },
            )?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads the post-to-campaign map; other fields stay empty.
    pub fn read_jsonl(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            post_id: String,
            campaign_id: Option<String>,
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut truth = GroundTruth::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line)
                .map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
            if truth
                .post_campaign
                .insert(row.post_id.clone(), row.campaign_id)
                .is_some()
            {
                return Err(Error::format(
                    path,
                    format!("duplicate post id {}", row.post_id),
                ));
            }
        }
        Ok(truth)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SynthCorpus {
    pub posts: PostCollection,
    pub accounts: AccountCollection,
    pub domains: BTreeSet<String>,
    pub keywords: Vec<String>,
    pub truth: GroundTruth,
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    d.and_hms_opt(0, 0, 0).unwrap().and_utc()
}

/// Relative posting activity per UTC hour for human personas, peaking in
/// Indian daytime.
const DIURNAL: [f64; 24] = [
    3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 8.0, 8.0, 7.0, 7.0, 7.0, 8.0, 9.0, 10.0, 10.0, 9.0, 7.0, 5.0,
    3.0, 2.0, 1.0, 1.0, 1.0, 2.0,
];

struct Clock {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    hours: WeightedIndex<f64>,
}

impl Clock {
    fn clamp(&self, t: DateTime<Utc>) -> DateTime<Utc> {
        t.clamp(self.start, self.end)
    }

    /// Day from `t`, hour of day from the diurnal profile.
    fn diurnal(&self, rng: &mut ChaCha8Rng, t: DateTime<Utc>) -> DateTime<Utc> {
        let h = self.hours.sample(rng) as u32;
        let day = t.date_naive().and_hms_opt(h, 0, 0).unwrap().and_utc();
        self.clamp(day + Duration::seconds(rng.random_range(0..3600)))
    }

    fn uniform(&self, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
        let span = (self.end - self.start).num_seconds().max(0);
        self.start + Duration::seconds(rng.random_range(0..=span))
    }
}

fn draw_party(rng: &mut ChaCha8Rng, probs: &[f64; 3]) -> Option<Party> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (p, party) in probs.iter().zip(Party::ALL) {
        acc += p;
        if u < acc {
            return Some(party);
        }
    }
    None
}

struct AccountPool {
    ids: Vec<String>,
    used: Vec<usize>,
    cap: usize,
}

impl AccountPool {
    /// `preferred` first; the first account with spare capacity after a
    /// random start otherwise.
    fn take(&mut self, rng: &mut ChaCha8Rng, preferred: Option<usize>) -> usize {
        let start = match preferred {
            Some(i) if self.used[i] < self.cap => i,
            _ => rng.random_range(0..self.ids.len()),
        };
        let n = self.ids.len();
        let i = (0..n)
            .map(|k| (start + k) % n)
            .find(|&i| self.used[i] < self.cap)
            .expect("capacity checked before generation");
        self.used[i] += 1;
        i
    }
}

struct Draft {
    account: usize,
    timestamp: DateTime<Utc>,
    text: String,
    urls: Vec<String>,
    is_retweet: bool,
    lang: Option<String>,
    campaign: Option<String>,
}

/// Generates a corpus; identical configs give identical corpora.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let p = 1.0 / (cfg.campaign_size_mean - 1.0);
    let geom = Geometric::new(p.min(1.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let sizes: Vec<usize> = (0..cfg.n_campaigns)
        .map(|_| 2 + geom.sample(&mut rng) as usize)
        .collect();
    let total = sizes.iter().sum::<usize>()
        + cfg.noise_posts
        + cfg.n_retweets
        + cfg.n_foreign
        + cfg.n_short;
    if total > 0 && cfg.n_accounts.saturating_mul(cfg.max_posts_per_account) < total {
        return Err(Error::InvalidArgument(format!(
            "{total} posts exceed what {} accounts can emit at {} posts each",
            cfg.n_accounts, cfg.max_posts_per_account
        )));
    }

    // Accounts and personas.
    let width = cfg.n_accounts.max(1).to_string().len().max(5);
    let ids: Vec<String> = (0..cfg.n_accounts)
        .map(|i| format!("u{:0width$}", i + 1))
        .collect();
    let mut order: Vec<usize> = (0..cfg.n_accounts).collect();
    order.shuffle(&mut rng);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for g in 0..cfg.n_groups {
        let lo = g * cfg.group_size;
        if lo >= order.len() {
            break;
        }
        groups.push(order[lo..(lo + cfg.group_size).min(order.len())].to_vec());
    }
    let group_party: Vec<Option<Party>> = groups
        .iter()
        .map(|_| draw_party(&mut rng, &cfg.group_party_probs))
        .collect();
    let mut personas = vec![Persona::default(); cfg.n_accounts];
    for (g, members) in groups.iter().enumerate() {
        for &m in members {
            personas[m].group = Some(g);
        }
    }
    let mut accounts = AccountCollection::default();
    for (i, id) in ids.iter().enumerate() {
        let persona = &mut personas[i];
        persona.bot = rng.random_bool(cfg.bot_fraction);
        persona.verified = !persona.bot && rng.random_bool(cfg.verified_fraction);
        persona.party = match persona.group {
            Some(g) => group_party[g].filter(|_| rng.random_bool(cfg.group_label_rate)),
            None => draw_party(&mut rng, &cfg.party_probs),
        };
        let (cap, rbs) = if persona.bot {
            (rng.random_range(0.905..=1.0), rng.random_range(0.905..=1.0))
        } else if persona.verified {
            (rng.random_range(0.0..0.6), rng.random_range(0.0..0.6))
        } else {
            let cap: f64 = rng.random_range(0.0..0.95);
            let rbs: f64 = if cap > 0.9 {
                rng.random_range(0.0..0.9)
            } else {
                rng.random_range(0.0..0.95)
            };
            (cap, rbs)
        };
        let missing = !persona.bot && rng.random_bool(cfg.score_missing_rate);
        accounts.insert(Account {
            id: id.clone(),
            handle: format!("h_{}", random_token(&mut rng, 8).to_lowercase()),
            verified: persona.verified,
            cap: (!missing).then_some((cap * 1e4).round() / 1e4),
            rbs: (!missing).then_some((rbs * 1e4).round() / 1e4),
            party: persona.party,
        });
    }
    let mut pool = AccountPool {
        ids: ids.clone(),
        used: vec![0; cfg.n_accounts],
        cap: cfg.max_posts_per_account,
    };

    // Vocabularies avoid every lexicon and keyword token so planted terms
    // are the only matches.
    let mut reserved: BTreeSet<String> = TOXIC_TERMS.iter().map(|s| s.to_string()).collect();
    for k in &cfg.keywords {
        reserved.extend(k.split_whitespace().map(str::to_lowercase));
    }
    let lexicon = LexiconScorer::builtin();
    let latin_all = vocabulary(&mut rng, Script::Latin, 6000, &reserved);
    // Keyword matching is by substring, so no word may contain a keyword token.
    let latin: Vec<String> = latin_all
        .into_iter()
        .filter(|w| {
            lexicon.lexicon_score(w) == Default::default()
                && !reserved.iter().any(|r| w.contains(r.as_str()))
        })
        .collect();
    let hindi = vocabulary(&mut rng, Script::Devanagari, 3000, &reserved);

    // Specious domains never collide with benign hosts.
    let mut domains = BTreeSet::new();
    while domains.len() < cfg.n_specious_domains {
        let d = format!(
            "{}{}.{}",
            latin.choose(&mut rng).unwrap(),
            latin.choose(&mut rng).unwrap(),
            TLDS.choose(&mut rng).unwrap()
        );
        let probe: BTreeSet<String> = [d.clone()].into();
        if BENIGN_HOSTS
            .iter()
            .all(|h| crate::screening::host_matches(h, &probe).is_none())
        {
            domains.insert(d);
        }
    }
    let domain_list: Vec<String> = domains.iter().cloned().collect();

    let clock = Clock {
        start: midnight(cfg.date_from),
        end: midnight(cfg.date_to) + Duration::seconds(86_399),
        hours: WeightedIndex::new(DIURNAL).expect("positive weights"),
    };
    let burst = Exp::new(1.0 / cfg.bot_burst_minutes.max(1e-9)).expect("positive rate");

    let mut drafts: Vec<Draft> = Vec::new();
    let mut campaigns: BTreeMap<String, CampaignTruth> = BTreeMap::new();
    let cwidth = cfg.n_campaigns.max(1).to_string().len().max(4);
    let link = |rng: &mut ChaCha8Rng, host: &str| -> String {
        let prefix = *["", "www.", "m."].choose(rng).unwrap();
        format!("https://{prefix}{host}/{}", random_token(rng, 10))
    };
    for (c, &size) in sizes.iter().enumerate() {
        let cid = format!("c{:0cwidth$}", c + 1);
        let is_hindi = rng.random_bool(cfg.hindi_campaign_fraction);
        let (script, vocab, lang) = if is_hindi {
            (Script::Devanagari, &hindi, "hi")
        } else {
            (Script::Latin, &latin, "en")
        };
        let mut inserts = Vec::new();
        let keyword = (rng.random_bool(cfg.keyword_campaign_fraction) && !cfg.keywords.is_empty())
            .then(|| cfg.keywords.choose(&mut rng).unwrap().clone());
        let toxic_term = rng
            .random_bool(cfg.toxic_campaign_fraction)
            .then(|| TOXIC_TERMS.choose(&mut rng).unwrap().to_string());
        inserts.extend(keyword.iter().cloned());
        inserts.extend(toxic_term.iter().cloned());
        let specious = (rng.random_bool(cfg.specious_link_rate) && !domain_list.is_empty())
            .then(|| domain_list.choose(&mut rng).unwrap().clone());
        let n_words = rng.random_range(12..=20);
        let words = sample_words(&mut rng, vocab, n_words);
        let template = Template::build(&mut rng, script, words, &inserts);
        let group = if groups.is_empty() {
            0
        } else {
            rng.random_range(0..groups.len())
        };
        let latest_start =
            clock.end - Duration::seconds((cfg.campaign_spread_days * 86_400.0) as i64);
        let start = clock.start
            + Duration::seconds(
                rng.random_range(0..=(latest_start - clock.start).num_seconds().max(0)),
            );

        for _ in 0..size {
            let preferred = match groups.get(group) {
                Some(members) if rng.random_bool(cfg.in_group_prob) => {
                    Some(*members.choose(&mut rng).unwrap())
                }
                _ => None,
            };
            let account = pool.take(&mut rng, preferred);
            let timestamp = if personas[account].bot {
                clock.clamp(start + Duration::seconds((burst.sample(&mut rng) * 60.0) as i64))
            } else {
                let offset = rng.random_range(0.0..=cfg.campaign_spread_days) * 86_400.0;
                clock.diurnal(&mut rng, start + Duration::seconds(offset as i64))
            };
            let mut text = template.mutate(&mut rng, cfg.mutation_rate);
            if rng.random_bool(cfg.decoration_rate) {
                text = format!("@{} {text}", random_token(&mut rng, 7).to_lowercase());
            }
            if rng.random_bool(cfg.decoration_rate) {
                text = format!("{text} https://t.co/{}", random_token(&mut rng, 10));
            }
            let mut urls = Vec::new();
            match &specious {
                Some(d) => urls.push(link(&mut rng, d)),
                None => {
                    if rng.random_bool(cfg.benign_link_rate) {
                        let host = *BENIGN_HOSTS.choose(&mut rng).unwrap();
                        urls.push(link(&mut rng, host));
                    }
                }
            }
            drafts.push(Draft {
                account,
                timestamp,
                text,
                urls,
                is_retweet: false,
                lang: Some(lang.to_string()),
                campaign: Some(cid.clone()),
            });
        }
        campaigns.insert(
            cid,
            CampaignTruth {
                size,
                group,
                hindi: is_hindi,
                toxic_term,
                keyword,
                specious_domain: specious,
                cosine_floor: None,
            },
        );
    }

    // Filler: unique posts, then posts the corpus filter removes.
    let filler = |rng: &mut ChaCha8Rng,
                  pool: &mut AccountPool,
                  lo: usize,
                  hi: usize|
     -> (usize, DateTime<Utc>, String) {
        let account = pool.take(rng, None);
        let t = clock.uniform(rng);
        let t = clock.diurnal(rng, t);
        let n = rng.random_range(lo..=hi);
        (account, t, sample_words(rng, &latin, n).join(" "))
    };
    for _ in 0..cfg.noise_posts {
        let (account, timestamp, text) = filler(&mut rng, &mut pool, 8, 20);
        let mut urls = Vec::new();
        if rng.random_bool(cfg.benign_link_rate) {
            let host = *BENIGN_HOSTS.choose(&mut rng).unwrap();
            urls.push(link(&mut rng, host));
        }
        drafts.push(Draft {
            account,
            timestamp,
            text,
            urls,
            is_retweet: false,
            lang: Some("en".into()),
            campaign: None,
        });
    }
    let n_campaign_drafts = drafts.len() - cfg.noise_posts;
    for _ in 0..cfg.n_retweets {
        let (account, timestamp, _) = filler(&mut rng, &mut pool, 1, 1);
        let source = if drafts.is_empty() {
            sample_words(&mut rng, &latin, 10).join(" ")
        } else {
            drafts[rng.random_range(0..drafts.len().min(n_campaign_drafts.max(1)))]
                .text
                .clone()
        };
        drafts.push(Draft {
            account,
            timestamp,
            text: format!("RT @{}: {source}", random_token(&mut rng, 6).to_lowercase()),
            urls: Vec::new(),
            is_retweet: true,
            lang: Some("en".into()),
            campaign: None,
        });
    }
    for _ in 0..cfg.n_foreign {
        let (account, timestamp, text) = filler(&mut rng, &mut pool, 8, 14);
        drafts.push(Draft {
            account,
            timestamp,
            text,
            urls: Vec::new(),
            is_retweet: false,
            lang: Some(
                ["es", "fr", "pt", "de"]
                    .choose(&mut rng)
                    .unwrap()
                    .to_string(),
            ),
            campaign: None,
        });
    }
    for _ in 0..cfg.n_short {
        let (account, timestamp, text) = filler(&mut rng, &mut pool, 1, 3);
        drafts.push(Draft {
            account,
            timestamp,
            text,
            urls: Vec::new(),
            is_retweet: false,
            lang: Some("en".into()),
            campaign: None,
        });
    }

    // Post ids follow a shuffled order so id order carries no campaign signal.
    drafts.shuffle(&mut rng);
    let pwidth = drafts.len().max(1).to_string().len().max(6);
    let mut posts = Vec::with_capacity(drafts.len());
    let mut post_campaign = BTreeMap::new();
    let mut specious_daily: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for (i, d) in drafts.into_iter().enumerate() {
        let id = format!("p{:0pwidth$}", i + 1);
        if let Some(c) = &d.campaign {
            if campaigns[c].specious_domain.is_some() {
                *specious_daily.entry(d.timestamp.date_naive()).or_default() += 1;
            }
        }
        post_campaign.insert(id.clone(), d.campaign);
        posts.push(Post {
            id,
            account_id: ids[d.account].clone(),
            timestamp: d.timestamp.with_nanosecond(0).unwrap(),
            text: d.text,
            urls: d.urls,
            is_retweet: d.is_retweet,
            lang: d.lang,
        });
    }

    // Planted cosine floor under the configured embedder.
    let embedder = HashedNgram::new(cfg.embed_dim, HashedNgram::DEFAULT_RANGE, cfg.embed_seed)?;
    let mut by_campaign: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for p in &posts {
        if let Some(Some(c)) = post_campaign.get(&p.id) {
            if let Some(v) = embedder.embed(&normalize_text(&p.text)) {
                by_campaign.entry(c.as_str()).or_default().push(v);
            }
        }
    }
    let mut floor: Option<f64> = None;
    for (c, vs) in by_campaign {
        let mut min: Option<f64> = None;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let cos = cosine(&vs[i], &vs[j])?;
                min = Some(min.map_or(cos, |m: f64| m.min(cos)));
            }
        }
        if let Some(m) = min {
            floor = Some(floor.map_or(m, |f: f64| f.min(m)));
        }
        campaigns.get_mut(c).expect("campaign exists").cosine_floor = min;
    }

    Ok(SynthCorpus {
        posts: PostCollection::new(posts)?,
        accounts,
        domains,
        keywords: cfg.keywords.clone(),
        truth: GroundTruth {
            post_campaign,
            personas: ids.iter().cloned().zip(personas).collect(),
            campaigns,
            specious_daily,
            cosine_floor: floor,
        },
    })
}

/// Writes `posts.jsonl`, `accounts.csv`, `domains.txt`, `keywords.txt`
/// and `truth.jsonl` into `dir`, returning the paths.
pub fn write_corpus(dir: &Path, corpus: &SynthCorpus) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let posts = dir.join("posts.jsonl");
    write_posts_jsonl(&posts, corpus.posts.iter())?;
    let accounts = dir.join("accounts.csv");
    write_accounts_csv(&accounts, corpus.accounts.iter())?;
    let write_lines = |path: &Path, lines: &mut dyn Iterator<Item = &String>| -> Result<()> {
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        for l in lines {
            writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    };
    let domains = dir.join("domains.txt");
    write_lines(&domains, &mut corpus.domains.iter())?;
    let keywords = dir.join("keywords.txt");
    write_lines(&keywords, &mut corpus.keywords.iter())?;
    let truth = dir.join("truth.jsonl");
    corpus.truth.write_jsonl(&truth)?;
    Ok(vec![posts, accounts, domains, keywords, truth])
}

/// Scores predicted clusters over the posts they cover (clusters plus
/// noise), each of which must appear in `truth`.
pub fn evaluate(predicted: &ClusterSet, truth: &GroundTruth) -> Result<EvalReport> {
    let mut universe = BTreeMap::new();
    for id in predicted
        .clusters
        .iter()
        .flat_map(|c| c.members.iter())
        .chain(&predicted.noise)
    {
        let label = truth.post_campaign.get(id).ok_or_else(|| {
            Error::InvalidArgument(format!("post {id} missing from ground truth"))
        })?;
        universe.insert(id.clone(), label.clone());
    }
    let groups: Vec<&Vec<String>> = predicted.clusters.iter().map(|c| &c.members).collect();
    let groups: Vec<Vec<&str>> = groups
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    evaluate_groups(&groups, &universe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{filter_posts, FilterConfig};

    fn small() -> SynthConfig {
        SynthConfig {
            n_accounts: 200,
            n_campaigns: 30,
            noise_posts: 100,
            n_retweets: 10,
            n_foreign: 10,
            n_short: 10,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn each_toxic_term_alone_is_labeled() {
        let lex = LexiconScorer::builtin();
        for t in TOXIC_TERMS {
            assert!(!lex.lexicon_score(t).labels(0.5).is_empty(), "{t}");
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.posts.as_slice(), b.posts.as_slice());
        assert_eq!(a.truth, b.truth);
        let other = generate(&SynthConfig {
            seed: 12,
            ..small()
        })
        .unwrap();
        assert_ne!(a.posts.as_slice(), other.posts.as_slice());

        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let f1 = write_corpus(d1.path(), &a).unwrap();
        write_corpus(d2.path(), &b).unwrap();
        for f in f1 {
            let name = f.file_name().unwrap();
            assert_eq!(
                std::fs::read(&f).unwrap(),
                std::fs::read(d2.path().join(name)).unwrap()
            );
        }
    }

    #[test]
    fn zero_campaigns_is_all_filler() {
        let c = generate(&SynthConfig {
            n_campaigns: 0,
            ..small()
        })
        .unwrap();
        assert!(c.truth.post_campaign.values().all(Option::is_none));
        assert!(c.truth.campaigns.is_empty());
        assert_eq!(c.truth.cosine_floor, None);
        assert_eq!(c.posts.len(), 130);
    }

    #[test]
    fn infeasible_volume_is_error() {
        let cfg = SynthConfig {
            n_accounts: 2,
            max_posts_per_account: 3,
            ..small()
        };
        assert!(generate(&cfg).is_err());
        assert!(generate(&SynthConfig {
            mutation_rate: 1.5,
            ..small()
        })
        .is_err());
    }

    #[test]
    fn campaign_posts_survive_filter_and_filler_is_removed() {
        let c = generate(&small()).unwrap();
        let (kept, stats) = filter_posts(&c.posts, &FilterConfig::default());
        assert_eq!(stats.retweets, 10);
        assert_eq!(stats.language, 10);
        assert_eq!(stats.too_few_words, 10);
        let planted = c
            .truth
            .post_campaign
            .values()
            .filter(|v| v.is_some())
            .count();
        let kept_planted = kept
            .iter()
            .filter(|p| c.truth.post_campaign[&p.id].is_some())
            .count();
        assert_eq!(planted, kept_planted);
    }

    #[test]
    fn truth_round_trip_and_sizes() {
        let c = generate(&small()).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        c.truth.write_jsonl(f.path()).unwrap();
        let back = GroundTruth::read_jsonl(f.path()).unwrap();
        assert_eq!(back.post_campaign, c.truth.post_campaign);
        for (id, camp) in &c.truth.campaigns {
            assert!(camp.size >= 2);
            let n = c
                .truth
                .post_campaign
                .values()
                .filter(|v| v.as_deref() == Some(id.as_str()))
                .count();
            assert_eq!(n, camp.size);
        }
        assert!(c.truth.cosine_floor.unwrap() > 0.5);
    }
}
