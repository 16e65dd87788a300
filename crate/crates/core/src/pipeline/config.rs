use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{ClassifierConfig, Family};
use crate::corpus::{ScoreOrientation, UserFilter};
use crate::error::{Error, Result};
use crate::eval::Dataset;
use crate::newsstudy::CountMode;
use crate::polex::LexiconConfig;
use crate::textprep::StopwordOrder;
use crate::topics::TopicConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub tweets: Option<PathBuf>,
    pub friends: Option<PathBuf>,
    pub vaa: Option<PathBuf>,
    /// Election windows; the bundled GE2010/2015/2017 list when unset.
    pub periods: Option<PathBuf>,
    pub news_tweets: Option<PathBuf>,
    pub news_friends: Option<PathBuf>,
    pub shares: Option<PathBuf>,
    /// URL patterns; the bundled outlet list when unset.
    pub patterns: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconSource {
    /// Seeds from election-window frequencies, expanded by embeddings.
    #[default]
    Induced,
    /// The bundled final word list.
    Published,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub sparsity_political: f64,
    pub sparsity_nonpolitical: f64,
    pub sparsity_network: f64,
    pub ngram_orders: Vec<usize>,
    pub stopword_order: StopwordOrder,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            sparsity_political: 0.9,
            sparsity_nonpolitical: 0.85,
            sparsity_network: 0.88,
            ngram_orders: vec![1, 2, 3],
            stopword_order: StopwordOrder::BeforeStemming,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n_samples: usize,
    pub train_fraction: f64,
    /// Cross-validation folds on each training split; 0 skips cross
    /// validation and the threshold table that depends on it.
    pub cv_folds: usize,
    pub datasets: Vec<Dataset>,
    pub classifiers: Vec<Family>,
    /// F1 targets of the threshold table, besides the τ = 0.5 base row.
    pub f1_targets: Vec<f64>,
    pub importance_repeats: usize,
    pub top_accounts: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_samples: 5,
            train_fraction: 0.8,
            cv_folds: 10,
            datasets: Dataset::ALL.to_vec(),
            classifiers: Family::ALL.to_vec(),
            f1_targets: vec![0.90, 0.95],
            importance_repeats: 10,
            top_accounts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewsConfig {
    pub dataset: Dataset,
    pub classifier: Family,
    /// Which sample's model and topic model to apply.
    pub sample: usize,
    pub tau: f64,
    pub min_total_freq: usize,
    pub count_mode: CountMode,
}

impl Default for NewsConfig {
    fn default() -> Self {
        NewsConfig {
            dataset: Dataset::NonPolNet,
            classifier: Family::SvmPoly,
            sample: 1,
            tau: 0.7,
            min_total_freq: 3,
            count_mode: CountMode::Users,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub orientation: ScoreOrientation,
    pub filter: UserFilter,
    pub lexicon_source: LexiconSource,
    pub lexicon: LexiconConfig,
    pub features: FeatureConfig,
    pub topics: TopicConfig,
    pub classifier: ClassifierConfig,
    pub eval: EvalConfig,
    pub news: NewsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Inputs::default(),
            output_dir: PathBuf::from("out"),
            seed: 1,
            orientation: ScoreOrientation::default(),
            filter: UserFilter::default(),
            lexicon_source: LexiconSource::default(),
            lexicon: LexiconConfig::default(),
            features: FeatureConfig::default(),
            topics: TopicConfig::default(),
            classifier: ClassifierConfig::default(),
            eval: EvalConfig::default(),
            news: NewsConfig::default(),
        }
    }
}

/// Pipeline stages in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Lexicon,
    Dfm,
    Topics,
    Train,
    Eval,
    Predict,
    Newsstudy,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Lexicon => "lexicon",
            Stage::Dfm => "dfm",
            Stage::Topics => "topics",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Predict => "predict",
            Stage::Newsstudy => "newsstudy",
        }
    }
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn required<'a>(p: &'a Option<PathBuf>, field: &str) -> Result<&'a Path> {
    let path = p.as_deref().ok_or_else(|| Error::config(field, "is required"))?;
    if !path.is_file() {
        return Err(Error::config(field, format!("file {} does not exist", path.display())));
    }
    Ok(path)
}

fn optional(p: &Option<PathBuf>, field: &str) -> Result<()> {
    match p {
        Some(path) if !path.is_file() => Err(Error::config(field, format!("file {} does not exist", path.display()))),
        _ => Ok(()),
    }
}

fn in_open_unit(v: f64, field: &str) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must lie in (0,1)")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(json_field(&e.to_string()), e))
    }

    /// Reads a config file; relative paths are taken relative to its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let i = &mut self.inputs;
        for p in [
            &mut i.tweets,
            &mut i.friends,
            &mut i.vaa,
            &mut i.periods,
            &mut i.news_tweets,
            &mut i.news_friends,
            &mut i.shares,
            &mut i.patterns,
            &mut self.lexicon.denylist,
            &mut self.lexicon.manual_additions,
        ] {
            resolve(base, p);
        }
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    /// Checks the fields a stage depends on.
    pub fn validate(&self, stage: Stage) -> Result<()> {
        let i = &self.inputs;
        optional(&i.periods, "inputs.periods")?;
        optional(&i.patterns, "inputs.patterns")?;
        optional(&self.lexicon.denylist, "lexicon.denylist")?;
        optional(&self.lexicon.manual_additions, "lexicon.manual_additions")?;
        if !(0.0..=1.0).contains(&self.filter.min_english) {
            return Err(Error::config("filter.min_english", "must lie in [0,1]"));
        }
        in_open_unit(self.features.sparsity_political, "features.sparsity_political")?;
        in_open_unit(self.features.sparsity_nonpolitical, "features.sparsity_nonpolitical")?;
        in_open_unit(self.features.sparsity_network, "features.sparsity_network")?;
        if self.features.ngram_orders.is_empty() || self.features.ngram_orders.contains(&0) {
            return Err(Error::config("features.ngram_orders", "needs positive orders"));
        }
        if self.topics.k == 0 {
            return Err(Error::config("topics.k", "must be positive"));
        }
        if self.lexicon.skipgram.dim == 0 || self.lexicon.skipgram.window == 0 {
            return Err(Error::config("lexicon.skipgram", "dim and window must be positive"));
        }
        let e = &self.eval;
        if e.n_samples == 0 {
            return Err(Error::config("eval.n_samples", "must be positive"));
        }
        in_open_unit(e.train_fraction, "eval.train_fraction")?;
        if e.cv_folds == 1 {
            return Err(Error::config("eval.cv_folds", "use 0 to skip or at least 2"));
        }
        if e.datasets.is_empty() {
            return Err(Error::config("eval.datasets", "must not be empty"));
        }
        if e.classifiers.is_empty() {
            return Err(Error::config("eval.classifiers", "must not be empty"));
        }
        if let Some(t) = e.f1_targets.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::config("eval.f1_targets", format!("{t} must lie in (0,1]")));
        }
        let c = &self.classifier;
        if !(c.c > 0.0) {
            return Err(Error::config("classifier.c", "must be positive"));
        }
        if c.gamma.is_some_and(|g| !(g > 0.0)) {
            return Err(Error::config("classifier.gamma", "must be positive"));
        }
        if !(c.nn.learning_rate > 0.0) || c.nn.hidden == 0 || c.nn.batch_size == 0 {
            return Err(Error::config("classifier.nn", "learning_rate, hidden and batch_size must be positive"));
        }
        let n = &self.news;
        if !(0.5..1.0).contains(&n.tau) {
            return Err(Error::config("news.tau", "must lie in [0.5,1)"));
        }
        if n.sample == 0 || n.sample > e.n_samples {
            return Err(Error::config("news.sample", format!("must lie in 1..={}", e.n_samples)));
        }
        match stage {
            Stage::Ingest => {
                required(&i.tweets, "inputs.tweets")?;
                required(&i.friends, "inputs.friends")?;
                required(&i.vaa, "inputs.vaa")?;
            }
            Stage::Lexicon | Stage::Dfm => {
                required(&i.tweets, "inputs.tweets")?;
                if stage == Stage::Dfm {
                    required(&i.friends, "inputs.friends")?;
                }
            }
            Stage::Topics | Stage::Train | Stage::Eval | Stage::Predict => {}
            Stage::Newsstudy => {
                required(&i.news_tweets, "inputs.news_tweets")?;
                required(&i.shares, "inputs.shares")?;
                optional(&i.news_friends, "inputs.news_friends")?;
                if !e.datasets.contains(&n.dataset) {
                    return Err(Error::config("news.dataset", "is not among eval.datasets"));
                }
                if !e.classifiers.contains(&n.classifier) {
                    return Err(Error::config("news.classifier", "is not among eval.classifiers"));
                }
            }
        }
        Ok(())
    }

    /// Seed of balanced sample `s` (0-based).
    pub fn sample_seed(&self, s: usize) -> u64 {
        self.seed.wrapping_add(s as u64)
    }

    pub fn sample_seeds(&self) -> Vec<u64> {
        (0..self.eval.n_samples).map(|s| self.sample_seed(s)).collect()
    }

    /// Config JSON without the output directory, which must not affect
    /// artifact contents.
    pub fn fingerprint_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }
}

/// Best-effort field name from a serde error message.
fn json_field(msg: &str) -> String {
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "config".to_string()
}
