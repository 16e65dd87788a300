use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    #[serde(rename = "lang", default, skip_serializing_if = "Option::is_none")]
    pub detected_language: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VaaSource {
    /// I Side With
    #[serde(rename = "ISW")]
    Isw,
    /// Vote Match
    #[serde(rename = "VM")]
    Vm,
    /// Who Should You Vote For
    #[serde(rename = "WSYVF")]
    Wsyvf,
}

impl VaaSource {
    pub const ALL: [VaaSource; 3] = [VaaSource::Isw, VaaSource::Vm, VaaSource::Wsyvf];

    pub fn as_str(self) -> &'static str {
        match self {
            VaaSource::Isw => "ISW",
            VaaSource::Vm => "VM",
            VaaSource::Wsyvf => "WSYVF",
        }
    }
}

impl std::str::FromStr for VaaSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ISW" => Ok(VaaSource::Isw),
            "VM" => Ok(VaaSource::Vm),
            "WSYVF" => Ok(VaaSource::Wsyvf),
            other => Err(format!("unknown VAA source {other:?}")),
        }
    }
}

impl fmt::Display for VaaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One user's party matches from one voter advice application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaaResult {
    pub user_id: String,
    pub vaa_source: VaaSource,
    pub party_matches: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LeaningLabel {
    Left,
    Right,
    Dropped,
}

impl LeaningLabel {
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            LeaningLabel::Right
        } else if score < 0.0 {
            LeaningLabel::Left
        } else {
            LeaningLabel::Dropped
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaningRecord {
    pub user_id: String,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub label: LeaningLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub tweets: Vec<Tweet>,
    /// `None` when the follow list was never collected.
    pub friends: Option<BTreeSet<String>>,
    pub leaning: Option<LeaningRecord>,
}

impl UserRecord {
    pub fn english_fraction(&self) -> f64 {
        if self.tweets.is_empty() {
            return 0.0;
        }
        let en = self
            .tweets
            .iter()
            .filter(|t| t.detected_language.as_deref() == Some("en"))
            .count();
        en as f64 / self.tweets.len() as f64
    }
}

/// A user's tweets split by the political lexicon, each side in ascending
/// timestamp order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDocument {
    pub user_id: String,
    pub political_tweets: Vec<String>,
    pub nonpolitical_tweets: Vec<String>,
    pub tweet_count: usize,
    pub political_tweet_count: usize,
}

impl UserDocument {
    pub fn political_text(&self) -> String {
        self.political_tweets.join("\n")
    }

    pub fn nonpolitical_text(&self) -> String {
        self.nonpolitical_tweets.join("\n")
    }
}

/// An election window, inclusive of both end dates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionPeriod {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl ElectionPeriod {
    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        d >= self.start && d <= self.end
    }
}
