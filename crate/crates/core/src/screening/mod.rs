//! Account classification, keyword surfacing, toxicity labelling,
//! specious-domain matching and posting timelines.

mod keywords;
mod perspective;
mod specious;
mod toxicity;

use serde::{Deserialize, Serialize};

use crate::corpus::{Account, AccountCollection};
use crate::{Error, Result};

pub use keywords::{keyword_surface, KeywordHit, KeywordMatch, KeywordReport, TopCluster};
pub use perspective::PerspectiveClient;
pub use specious::{
    host_matches, match_specious, normalize_host, specious_timeline, url_host, DayCount,
    SpeciousMatch, SpeciousReport, TimelineReport,
};
pub use toxicity::{
    score_toxicity, ClusterToxicity, Dimension, LabelRow, LexiconScorer, ToxicityReport,
    ToxicityScorer, ToxicityScores, DEFAULT_TOX_THRESHOLD,
};

/// Both scores must strictly exceed their minimum for a bot label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotThresholds {
    pub cap_min: f64,
    pub rbs_min: f64,
}

impl Default for BotThresholds {
    fn default() -> Self {
        Self {
            cap_min: 0.9,
            rbs_min: 0.9,
        }
    }
}

impl BotThresholds {
    pub fn new(cap_min: f64, rbs_min: f64) -> Result<Self> {
        for (name, v) in [("cap_min", cap_min), ("rbs_min", rbs_min)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in [0, 1], got {v}"
                )));
            }
        }
        Ok(Self { cap_min, rbs_min })
    }
}

/// Labels are independent flags; `regular` means neither bot nor verified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountClass {
    pub bot: bool,
    pub verified: bool,
    pub political: bool,
    pub regular: bool,
}

pub fn classify_account(account: &Account, t: &BotThresholds) -> AccountClass {
    let bot =
        matches!((account.cap, account.rbs), (Some(c), Some(r)) if c > t.cap_min && r > t.rbs_min);
    AccountClass {
        bot,
        verified: account.verified,
        political: account.party.is_some(),
        regular: !bot && !account.verified,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub n_accounts: usize,
    pub n_bot: usize,
    pub n_verified: usize,
    pub n_political: usize,
    pub n_regular: usize,
    pub pct_bot: f64,
    pub pct_verified: f64,
    pub pct_political: f64,
    pub pct_regular: f64,
}

pub fn account_summary(accounts: &AccountCollection, t: &BotThresholds) -> SummaryReport {
    let mut r = SummaryReport {
        n_accounts: accounts.len(),
        ..Default::default()
    };
    for a in accounts {
        let c = classify_account(a, t);
        r.n_bot += c.bot as usize;
        r.n_verified += c.verified as usize;
        r.n_political += c.political as usize;
        r.n_regular += c.regular as usize;
    }
    let pct = |n: usize| {
        if r.n_accounts > 0 {
            100.0 * n as f64 / r.n_accounts as f64
        } else {
            0.0
        }
    };
    r.pct_bot = pct(r.n_bot);
    r.pct_verified = pct(r.n_verified);
    r.pct_political = pct(r.n_political);
    r.pct_regular = pct(r.n_regular);
    r
}
