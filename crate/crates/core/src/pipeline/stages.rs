use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{LexiconSource, RunConfig, Stage};
use super::manifest::write_manifest;
use crate::classify::{self, write_predictions, ClassifierModel, Family, PredLabel, Prediction};
use crate::corpus::{
    assemble_documents, default_periods, detect_languages, filter_users, ground_truth, group_users, load_friends,
    load_periods, load_tweets, load_vaa, ElectionPeriod, FunctionWordDetector, LeaningLabel, Tweet, UserRecord,
};
use crate::error::{Error, Result};
use crate::eval::{
    activity_index, balanced_sample, follow_shares, kfold, pearson, permutation_importance, prf_at, select_and_apply,
    split, CorrelationRow, CvRow, Dataset, EvalReport, FollowShareRow, MetricRow, ThresholdReportRow, ThresholdTarget,
};
use crate::newsstudy::{
    classify_sharers, counts_table, default_patterns, load_patterns, load_share_events, project_features,
    project_network, NetworkFallback,
};
use crate::polex::{published_lexicon, count_terms, induce_lexicon, Lexicon, LexiconSummary, Provenance};
use crate::textprep::{
    build_network_matrix, build_ngrams, join_features, smart_stopwords, trim_sparse, DfmBuilder, DfmHeader, DfmKind,
    FeatureMatrix, SparseDfm, TextPipeline,
};
use crate::topics::{fit_topic_model, ThetaMatrix, TopicModel};

fn stage_dir(cfg: &RunConfig, stage: Stage) -> PathBuf {
    cfg.output_dir.join(stage.as_str())
}

/// Empties and recreates a stage directory so stale files never reach the
/// manifest.
fn fresh_dir(cfg: &RunConfig, stage: Stage) -> Result<PathBuf> {
    let dir = stage_dir(cfg, stage);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn finish<W: Write>(w: W, path: &Path, f: impl FnOnce(W) -> Result<()>) -> Result<()> {
    f(w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// A user who passed ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptUser {
    pub user_id: String,
    pub label: LeaningLabel,
    pub normalized_score: f64,
    pub tweets: usize,
    pub english_fraction: f64,
    pub has_network: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub tweets: usize,
    pub tweet_warnings: usize,
    pub friend_records: usize,
    pub vaa_results: usize,
    pub users_with_tweets: usize,
    pub labelled: usize,
    pub rejected_conflicts: usize,
    pub invalid_vaa: usize,
    pub kept: usize,
    pub kept_left: usize,
    pub kept_right: usize,
    pub kept_with_network: usize,
}

fn periods(cfg: &RunConfig) -> Result<Vec<ElectionPeriod>> {
    match &cfg.inputs.periods {
        Some(p) => load_periods(p),
        None => Ok(default_periods()),
    }
}

fn input(p: &Option<PathBuf>) -> PathBuf {
    p.clone().expect("validated input")
}

fn load_friend_map(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (user, accounts) in load_friends(path)?.records {
        map.entry(user).or_default().extend(accounts);
    }
    Ok(map)
}

pub fn ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    cfg.validate(Stage::Ingest)?;
    let dir = fresh_dir(cfg, Stage::Ingest)?;
    let (tweets_path, friends_path, vaa_path) = (input(&cfg.inputs.tweets), input(&cfg.inputs.friends), input(&cfg.inputs.vaa));
    let loaded = load_tweets(&tweets_path)?;
    let friends = load_friend_map(&friends_path)?;
    let vaa = load_vaa(&vaa_path)?;
    let mut tweets = loaded.records;
    let n_tweets = tweets.len();
    detect_languages(&mut tweets, &FunctionWordDetector::default());
    let truth = ground_truth(&vaa.records, cfg.orientation);
    let users = group_users(tweets, &friends, &truth);
    let users_with_tweets = users.len();
    let labelled: Vec<UserRecord> = users
        .into_iter()
        .filter(|u| u.leaning.as_ref().is_some_and(|l| l.label != LeaningLabel::Dropped))
        .collect();
    let n_labelled = labelled.len();
    let kept = filter_users(labelled, cfg.filter);
    let rows: Vec<KeptUser> = kept
        .iter()
        .map(|u| {
            let l = u.leaning.as_ref().expect("labelled");
            KeptUser {
                user_id: u.user_id.clone(),
                label: l.label,
                normalized_score: l.normalized_score,
                tweets: u.tweets.len(),
                english_fraction: u.english_fraction(),
                has_network: u.friends.is_some(),
            }
        })
        .collect();
    write_csv(&dir.join("users.csv"), &rows)?;
    let truth_rows: Vec<_> = truth.records.values().cloned().collect();
    write_csv(&dir.join("ground_truth.csv"), &truth_rows)?;
    let summary = IngestSummary {
        tweets: n_tweets,
        tweet_warnings: loaded.warnings.len(),
        friend_records: friends.len(),
        vaa_results: vaa.records.len(),
        users_with_tweets,
        labelled: n_labelled,
        rejected_conflicts: truth.rejected.len(),
        invalid_vaa: truth.invalid.len(),
        kept: rows.len(),
        kept_left: rows.iter().filter(|r| r.label == LeaningLabel::Left).count(),
        kept_right: rows.iter().filter(|r| r.label == LeaningLabel::Right).count(),
        kept_with_network: rows.iter().filter(|r| r.has_network).count(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    log::info!(
        "ingest: {} of {} labelled users kept ({} left, {} right)",
        summary.kept,
        summary.labelled,
        summary.kept_left,
        summary.kept_right
    );
    write_manifest(cfg, &cfg.output_dir, Stage::Ingest, &[tweets_path, friends_path, vaa_path])?;
    Ok(summary)
}

fn artifact(cfg: &RunConfig, stage: Stage, name: &str) -> Result<PathBuf> {
    let p = stage_dir(cfg, stage).join(name);
    if !p.is_file() {
        return Err(Error::InvalidInput(format!(
            "{} not found; run the {} stage first",
            p.display(),
            stage.as_str()
        )));
    }
    Ok(p)
}

pub fn read_users(cfg: &RunConfig) -> Result<Vec<KeptUser>> {
    read_csv(&artifact(cfg, Stage::Ingest, "users.csv")?)
}

fn kept_tweets(cfg: &RunConfig, users: &[KeptUser]) -> Result<Vec<Tweet>> {
    let keep: BTreeSet<&str> = users.iter().map(|u| u.user_id.as_str()).collect();
    let path = input(&cfg.inputs.tweets);
    Ok(load_tweets(&path)?
        .records
        .into_iter()
        .filter(|t| keep.contains(t.user_id.as_str()))
        .collect())
}

#[derive(Serialize)]
struct IndexRow<'a> {
    term: &'a str,
    rho: f64,
    provenance: Option<Provenance>,
}

pub fn lexicon(cfg: &RunConfig) -> Result<(Lexicon, LexiconSummary)> {
    cfg.validate(Stage::Lexicon)?;
    let users = read_users(cfg)?;
    let dir = fresh_dir(cfg, Stage::Lexicon)?;
    let tweets = kept_tweets(cfg, &users)?;
    let periods = periods(cfg)?;
    let counts = count_terms(&tweets, &periods);
    let (lex, summary) = match cfg.lexicon_source {
        LexiconSource::Induced => induce_lexicon(&tweets, &periods, &cfg.lexicon)?,
        LexiconSource::Published => {
            let lex = published_lexicon();
            let summary = LexiconSummary {
                tweets_in_elections: counts.t_in,
                tweets_outside: counts.t_out,
                seeds: 0,
                manual: lex.len(),
                expanded: 0,
                embedding_vocab: 0,
            };
            (lex, summary)
        }
    };
    let mut w = create(&dir.join("lexicon.json"))?;
    lex.write_json(&mut w)?;
    w.flush().map_err(|e| Error::io(dir.join("lexicon.json"), e))?;
    write_json(&dir.join("summary.json"), &summary)?;
    let index = counts.index();
    let rows: Vec<IndexRow> = index
        .iter()
        .map(|(t, &rho)| IndexRow { term: t, rho, provenance: lex.get(t).map(|e| e.provenance) })
        .collect();
    write_csv(&dir.join("term_index.csv"), &rows)?;
    log::info!(
        "lexicon: {} terms ({} seed, {} expanded, {} manual)",
        lex.len(),
        summary.seeds,
        summary.expanded,
        summary.manual
    );
    let mut inputs = vec![input(&cfg.inputs.tweets), artifact(cfg, Stage::Ingest, "manifest.json")?];
    inputs.extend(cfg.inputs.periods.clone());
    write_manifest(cfg, &cfg.output_dir, Stage::Lexicon, &inputs)?;
    Ok((lex, summary))
}

/// Per-user counts used by the correlation analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentStats {
    pub user_id: String,
    pub tweet_count: usize,
    pub political_tweet_count: usize,
    pub activity: f64,
    pub nonpolitical_tokens: usize,
    pub political_tokens: usize,
}

/// Text flavour of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextKind {
    Political,
    NonPolitical,
}

impl TextKind {
    pub fn name(self) -> &'static str {
        match self {
            TextKind::Political => "pol",
            TextKind::NonPolitical => "nonpol",
        }
    }

    pub fn of(dataset: Dataset) -> Option<TextKind> {
        match dataset {
            Dataset::Net => None,
            Dataset::NonPol | Dataset::NonPolNet => Some(TextKind::NonPolitical),
            Dataset::Pol | Dataset::PolNet => Some(TextKind::Political),
        }
    }
}

fn write_dfm(dir: &Path, name: &str, dfm: &SparseDfm) -> Result<()> {
    write_json(&dir.join(format!("{name}.json")), &dfm.header())?;
    let path = dir.join(format!("{name}.csv"));
    let mut w = create(&path)?;
    finish(&mut w, &path, |w| dfm.write_triplets(w))?;
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn load_dfm(cfg: &RunConfig, name: &str) -> Result<SparseDfm> {
    let header: DfmHeader = read_json(&artifact(cfg, Stage::Dfm, &format!("{name}.json"))?)?;
    SparseDfm::read_triplets(&header, open(&artifact(cfg, Stage::Dfm, &format!("{name}.csv"))?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfmSummary {
    pub users: usize,
    pub political_features: usize,
    pub nonpolitical_features: usize,
    pub network_users: usize,
    pub network_accounts: usize,
}

pub fn dfm(cfg: &RunConfig) -> Result<DfmSummary> {
    cfg.validate(Stage::Dfm)?;
    let users = read_users(cfg)?;
    let lex_path = artifact(cfg, Stage::Lexicon, "lexicon.json")?;
    let lex = Lexicon::read_json(open(&lex_path)?)?;
    let dir = fresh_dir(cfg, Stage::Dfm)?;
    let mut by_user: BTreeMap<String, Vec<Tweet>> = BTreeMap::new();
    for t in kept_tweets(cfg, &users)? {
        by_user.entry(t.user_id.clone()).or_default().push(t);
    }
    let pipeline = TextPipeline::new(
        smart_stopwords().clone(),
        cfg.features.stopword_order,
        cfg.features.ngram_orders.clone(),
    );
    let orders = &cfg.features.ngram_orders;
    let mut pol = DfmBuilder::new();
    let mut nonpol = DfmBuilder::new();
    let mut stats = Vec::with_capacity(users.len());
    for u in &users {
        let record = UserRecord {
            user_id: u.user_id.clone(),
            tweets: by_user.remove(&u.user_id).unwrap_or_default(),
            friends: None,
            leaning: None,
        };
        let doc = assemble_documents(&record, &lex);
        let features = |tweets: &[String], builder: &mut DfmBuilder| {
            let mut tokens = 0;
            let mut feats = Vec::new();
            for t in tweets {
                let stems = pipeline.stems(t);
                tokens += stems.len();
                feats.extend(build_ngrams(&stems, orders));
            }
            builder.push_document(u.user_id.clone(), feats);
            tokens
        };
        let political_tokens = features(&doc.political_tweets, &mut pol);
        let nonpolitical_tokens = features(&doc.nonpolitical_tweets, &mut nonpol);
        stats.push(DocumentStats {
            user_id: u.user_id.clone(),
            tweet_count: doc.tweet_count,
            political_tweet_count: doc.political_tweet_count,
            activity: activity_index(&doc)?,
            nonpolitical_tokens,
            political_tokens,
        });
    }
    let pol = trim_sparse(&pol.finish(DfmKind::Text)?, cfg.features.sparsity_political)?;
    let nonpol = trim_sparse(&nonpol.finish(DfmKind::Text)?, cfg.features.sparsity_nonpolitical)?;
    let friends_path = input(&cfg.inputs.friends);
    let friends = load_friend_map(&friends_path)?;
    let kept_friends: BTreeMap<String, BTreeSet<String>> = users
        .iter()
        .filter_map(|u| friends.get(&u.user_id).map(|f| (u.user_id.clone(), f.clone())))
        .collect();
    let network = build_network_matrix(&kept_friends, cfg.features.sparsity_network)?;
    write_dfm(&dir, "pol", &pol)?;
    write_dfm(&dir, "nonpol", &nonpol)?;
    write_dfm(&dir, "network", &network)?;
    write_csv(&dir.join("documents.csv"), &stats)?;
    let summary = DfmSummary {
        users: users.len(),
        political_features: pol.n_cols(),
        nonpolitical_features: nonpol.n_cols(),
        network_users: network.n_rows(),
        network_accounts: network.n_cols(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    log::info!(
        "dfm: {} political, {} non-political features; {} accounts",
        summary.political_features,
        summary.nonpolitical_features,
        summary.network_accounts
    );
    let inputs = vec![
        input(&cfg.inputs.tweets),
        friends_path,
        artifact(cfg, Stage::Ingest, "manifest.json")?,
        artifact(cfg, Stage::Lexicon, "manifest.json")?,
    ];
    write_manifest(cfg, &cfg.output_dir, Stage::Dfm, &inputs)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSplit {
    /// 1-based sample number.
    pub sample: usize,
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SampleSplit {
    pub fn all(&self) -> Vec<String> {
        self.train.iter().chain(&self.test).cloned().collect()
    }
}

/// Labelled users that have every kind of feature.
fn population(users: &[KeptUser]) -> Vec<&KeptUser> {
    users.iter().filter(|u| u.has_network).collect()
}

fn text_kinds(cfg: &RunConfig) -> Vec<TextKind> {
    let mut kinds = Vec::new();
    for k in [TextKind::NonPolitical, TextKind::Political] {
        if cfg.eval.datasets.iter().any(|&d| TextKind::of(d) == Some(k)) {
            kinds.push(k);
        }
    }
    kinds
}

fn sample_dir(cfg: &RunConfig, stage: Stage, sample: usize) -> PathBuf {
    stage_dir(cfg, stage).join(format!("sample_{sample}"))
}

#[derive(Serialize)]
struct TopWordRow {
    topic: usize,
    rank: usize,
    word: String,
    statistic: crate::topics::ScoreKind,
}

pub fn topics(cfg: &RunConfig) -> Result<Vec<SampleSplit>> {
    cfg.validate(Stage::Topics)?;
    let users = read_users(cfg)?;
    let pop = population(&users);
    let ids: Vec<String> = pop.iter().map(|u| u.user_id.clone()).collect();
    let labels: Vec<LeaningLabel> = pop.iter().map(|u| u.label).collect();
    let kinds = text_kinds(cfg);
    let dfms: Vec<(TextKind, SparseDfm)> = kinds
        .iter()
        .map(|&k| Ok((k, load_dfm(cfg, k.name())?)))
        .collect::<Result<_>>()?;
    let dir = fresh_dir(cfg, Stage::Topics)?;
    let mut splits = Vec::new();
    for s in 0..cfg.eval.n_samples {
        let seed = cfg.sample_seed(s);
        let idx = balanced_sample(&labels, seed)?;
        let sub: Vec<LeaningLabel> = idx.iter().map(|&i| labels[i]).collect();
        let (tr, te) = split(&sub, cfg.eval.train_fraction, seed)?;
        let split = SampleSplit {
            sample: s + 1,
            seed,
            train: tr.iter().map(|&i| ids[idx[i]].clone()).collect(),
            test: te.iter().map(|&i| ids[idx[i]].clone()).collect(),
        };
        for (kind, dfm) in &dfms {
            let out = sample_dir(cfg, Stage::Topics, split.sample).join(kind.name());
            let train_dfm = dfm.select_rows(&split.train)?;
            let (model, report) = fit_topic_model(&train_dfm, &cfg.topics)?;
            let theta = model.infer(&dfm.select_rows(&split.all())?);
            let mut w = create(&out.join("model.json"))?;
            model.write_header(&mut w)?;
            w.flush().map_err(|e| Error::io(out.join("model.json"), e))?;
            let path = out.join("beta.csv");
            finish(create(&path)?, &path, |w| model.write_beta(w))?;
            let path = out.join("theta.csv");
            finish(create(&path)?, &path, |w| theta.write_csv(w))?;
            write_json(&out.join("fit.json"), &report)?;
            let top: Vec<TopWordRow> = model
                .top_words_report(cfg.topics.frex_weight, 10, 10)
                .into_iter()
                .map(|(topic, rank, word, statistic)| TopWordRow { topic, rank, word, statistic })
                .collect();
            write_csv(&out.join("top_words.csv"), &top)?;
            log::info!(
                "topics: sample {} {}: K={} over {} words, {} non-converged",
                split.sample,
                kind.name(),
                model.k,
                report.vocab_size,
                report.nonconverged_words
            );
        }
        splits.push(split);
    }
    write_json(&dir.join("splits.json"), &splits)?;
    write_manifest(cfg, &cfg.output_dir, Stage::Topics, &[artifact(cfg, Stage::Dfm, "manifest.json")?])?;
    Ok(splits)
}

fn read_splits(cfg: &RunConfig) -> Result<Vec<SampleSplit>> {
    read_json(&artifact(cfg, Stage::Topics, "splits.json")?)
}

fn topic_path(cfg: &RunConfig, sample: usize, kind: TextKind, file: &str) -> Result<PathBuf> {
    artifact(cfg, Stage::Topics, &format!("sample_{sample}/{}/{file}", kind.name()))
}

fn read_topic_model(cfg: &RunConfig, sample: usize, kind: TextKind) -> Result<TopicModel> {
    TopicModel::read(
        open(&topic_path(cfg, sample, kind, "model.json")?)?,
        open(&topic_path(cfg, sample, kind, "beta.csv")?)?,
    )
}

/// Feature sources for one sample.
struct SampleFeatures {
    network: SparseDfm,
    theta: HashMap<&'static str, FeatureMatrix>,
}

impl SampleFeatures {
    fn load(cfg: &RunConfig, sample: usize, network: &SparseDfm) -> Result<Self> {
        let mut theta = HashMap::new();
        for kind in text_kinds(cfg) {
            let t = ThetaMatrix::read_csv(open(&topic_path(cfg, sample, kind, "theta.csv")?)?)?;
            theta.insert(kind.name(), t.to_features()?);
        }
        Ok(SampleFeatures { network: network.clone(), theta })
    }

    fn matrix(&self, dataset: Dataset, ids: &[String]) -> Result<FeatureMatrix> {
        dataset_features(dataset, self.theta.get(TextKind::of(dataset).map_or("", |k| k.name())), &self.network, ids)
    }
}

/// Rows of `ids` for one dataset.
fn dataset_features(dataset: Dataset, theta: Option<&FeatureMatrix>, network: &SparseDfm, ids: &[String]) -> Result<FeatureMatrix> {
    let text = || theta.ok_or_else(|| Error::InvalidInput(format!("no topic features for {dataset}")));
    match dataset {
        Dataset::Net => Ok(FeatureMatrix::from_network(&network.select_rows(ids)?)),
        Dataset::NonPol | Dataset::Pol => text()?.select_rows(ids),
        Dataset::NonPolNet | Dataset::PolNet => {
            let joined = join_features(&text()?.select_rows(ids)?, &network.select_rows(ids)?)?;
            if joined.n_rows() != ids.len() {
                return Err(Error::InvalidInput(format!("{dataset}: some users lack network features")));
            }
            Ok(joined)
        }
    }
}

fn label_map(users: &[KeptUser]) -> HashMap<&str, &KeptUser> {
    users.iter().map(|u| (u.user_id.as_str(), u)).collect()
}

fn labels_of(users: &HashMap<&str, &KeptUser>, ids: &[String]) -> Vec<LeaningLabel> {
    ids.iter().map(|id| users[id.as_str()].label).collect()
}

fn model_path(cfg: &RunConfig, sample: usize, dataset: Dataset, family: Family) -> PathBuf {
    sample_dir(cfg, Stage::Train, sample).join(dataset.as_str()).join(format!("{}.json", family.as_str()))
}

fn oof_path(cfg: &RunConfig, sample: usize, dataset: Dataset, family: Family) -> PathBuf {
    sample_dir(cfg, Stage::Train, sample).join(dataset.as_str()).join(format!("{}_oof.csv", family.as_str()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub sample: usize,
    pub dataset: Dataset,
    pub classifier: Family,
    pub fold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredUser {
    pub user_id: String,
    pub label: LeaningLabel,
    pub p_right: f64,
}

pub fn train(cfg: &RunConfig) -> Result<Vec<FoldRow>> {
    cfg.validate(Stage::Train)?;
    let users = read_users(cfg)?;
    let by_id = label_map(&users);
    let splits = read_splits(cfg)?;
    let network = load_dfm(cfg, "network")?;
    fresh_dir(cfg, Stage::Train)?;
    let mut folds_out = Vec::new();
    for sp in &splits {
        let feats = SampleFeatures::load(cfg, sp.sample, &network)?;
        let y = labels_of(&by_id, &sp.train);
        let folds = if cfg.eval.cv_folds >= 2 { Some(kfold(&y, cfg.eval.cv_folds, sp.seed)?) } else { None };
        for &dataset in &cfg.eval.datasets {
            let x = feats.matrix(dataset, &sp.train)?;
            for &family in &cfg.eval.classifiers {
                if let Some(folds) = &folds {
                    let mut oof = vec![0.0; x.n_rows()];
                    for (f, held) in folds.iter().enumerate() {
                        let held_set: BTreeSet<usize> = held.iter().copied().collect();
                        let rest: Vec<String> =
                            (0..x.n_rows()).filter(|i| !held_set.contains(i)).map(|i| sp.train[i].clone()).collect();
                        let held_ids: Vec<String> = held.iter().map(|&i| sp.train[i].clone()).collect();
                        let model = classify::train(family, &x.select_rows(&rest)?, &labels_of(&by_id, &rest), &cfg.classifier)?;
                        let p = model.predict_matrix(&x.select_rows(&held_ids)?)?;
                        let truth = labels_of(&by_id, &held_ids);
                        let m = prf_at(&p, &truth, 0.5);
                        for (&i, v) in held.iter().zip(p) {
                            oof[i] = v;
                        }
                        folds_out.push(FoldRow {
                            sample: sp.sample,
                            dataset,
                            classifier: family,
                            fold: f + 1,
                            precision: m.precision,
                            recall: m.recall,
                            f1: m.f1,
                        });
                    }
                    let rows: Vec<ScoredUser> = sp
                        .train
                        .iter()
                        .zip(&oof)
                        .map(|(id, &p)| ScoredUser { user_id: id.clone(), label: by_id[id.as_str()].label, p_right: p })
                        .collect();
                    write_csv(&oof_path(cfg, sp.sample, dataset, family), &rows)?;
                }
                let model = classify::train(family, &x, &y, &cfg.classifier)?;
                let path = model_path(cfg, sp.sample, dataset, family);
                let mut w = create(&path)?;
                model.write_json(&mut w)?;
                w.flush().map_err(|e| Error::io(&path, e))?;
                log::info!("train: sample {} {dataset} {family} done", sp.sample);
            }
        }
    }
    write_csv(&stage_dir(cfg, Stage::Train).join("cv_folds.csv"), &folds_out)?;
    write_manifest(cfg, &cfg.output_dir, Stage::Train, &[artifact(cfg, Stage::Topics, "manifest.json")?])?;
    Ok(folds_out)
}

fn read_model(path: &Path) -> Result<ClassifierModel> {
    ClassifierModel::read_json(open(path)?)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Test predictions of one (dataset, classifier) pooled over samples.
#[derive(Default)]
struct Pooled {
    test: Vec<ScoredUser>,
    oof: Vec<ScoredUser>,
}

pub fn eval(cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate(Stage::Eval)?;
    let users = read_users(cfg)?;
    let by_id = label_map(&users);
    let splits = read_splits(cfg)?;
    let network = load_dfm(cfg, "network")?;
    let docs: Vec<DocumentStats> = read_csv(&artifact(cfg, Stage::Dfm, "documents.csv")?)?;
    let docs: HashMap<&str, &DocumentStats> = docs.iter().map(|d| (d.user_id.as_str(), d)).collect();
    let dir = fresh_dir(cfg, Stage::Eval)?;

    let mut report = EvalReport { seeds: cfg.sample_seeds(), ..EvalReport::default() };
    let mut pooled: BTreeMap<(Dataset, Family), Pooled> = BTreeMap::new();
    for sp in &splits {
        let feats = SampleFeatures::load(cfg, sp.sample, &network)?;
        let truth = labels_of(&by_id, &sp.test);
        for &dataset in &cfg.eval.datasets {
            let x = feats.matrix(dataset, &sp.test)?;
            for &family in &cfg.eval.classifiers {
                let model = read_model(&artifact(cfg, Stage::Train, &format!("sample_{}/{}/{}.json", sp.sample, dataset, family))?)?;
                let p = model.predict_matrix(&x)?;
                let m = prf_at(&p, &truth, 0.5);
                report.test.push(MetricRow {
                    dataset,
                    classifier: family,
                    sample: Some(sp.sample),
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                    unknown_fraction: m.unknown_fraction,
                    n: p.len(),
                });
                let scored: Vec<ScoredUser> = sp
                    .test
                    .iter()
                    .zip(&p)
                    .map(|(id, &p)| ScoredUser { user_id: id.clone(), label: by_id[id.as_str()].label, p_right: p })
                    .collect();
                let preds: Vec<Prediction> = scored
                    .iter()
                    .map(|s| Prediction { user_id: s.user_id.clone(), p_right: s.p_right, label: classify::apply_threshold(s.p_right, 0.5) })
                    .collect();
                let path = sample_dir(cfg, Stage::Eval, sp.sample).join(dataset.as_str()).join(format!("{family}.csv"));
                finish(create(&path)?, &path, |w| write_predictions(w, &preds))?;
                let entry = pooled.entry((dataset, family)).or_default();
                entry.test.extend(scored);
                if cfg.eval.cv_folds >= 2 {
                    let oof: Vec<ScoredUser> = read_csv(&artifact(cfg, Stage::Train, &format!("sample_{}/{}/{}_oof.csv", sp.sample, dataset, family))?)?;
                    entry.oof.extend(oof);
                }
            }
        }
    }
    // plain means over samples
    for &dataset in &cfg.eval.datasets {
        for &family in &cfg.eval.classifiers {
            let rows: Vec<&MetricRow> = report
                .test
                .iter()
                .filter(|r| r.dataset == dataset && r.classifier == family && r.sample.is_some())
                .collect();
            report.test.push(MetricRow {
                dataset,
                classifier: family,
                sample: None,
                precision: mean(rows.iter().map(|r| r.precision)),
                recall: mean(rows.iter().map(|r| r.recall)),
                f1: mean(rows.iter().map(|r| r.f1)),
                unknown_fraction: mean(rows.iter().map(|r| r.unknown_fraction)),
                n: rows.iter().map(|r| r.n).sum(),
            });
        }
    }
    if cfg.eval.cv_folds >= 2 {
        let folds: Vec<FoldRow> = read_csv(&artifact(cfg, Stage::Train, "cv_folds.csv")?)?;
        for &dataset in &cfg.eval.datasets {
            for &family in &cfg.eval.classifiers {
                report.cross_validation.push(CvRow {
                    dataset,
                    classifier: family,
                    f1: mean(folds.iter().filter(|r| r.dataset == dataset && r.classifier == family).map(|r| r.f1)),
                });
            }
        }
    }

    // best classifier per dataset by mean test F1; ties keep the earlier one
    let mut best_family: BTreeMap<Dataset, Family> = BTreeMap::new();
    for &dataset in &cfg.eval.datasets {
        let mut best: Option<(Family, f64)> = None;
        for &family in &cfg.eval.classifiers {
            if let Some(m) = report.mean_test(dataset, family) {
                if best.is_none_or(|(_, b)| m.f1 > b) {
                    best = Some((family, m.f1));
                }
            }
        }
        if let Some((f, _)) = best {
            best_family.insert(dataset, f);
        }
    }
    let best = |dataset: Dataset| best_family.get(&dataset).copied();

    if cfg.eval.cv_folds >= 2 {
        let mut targets = vec![ThresholdTarget::Base];
        targets.extend(cfg.eval.f1_targets.iter().map(|&t| ThresholdTarget::F1(t)));
        for &dataset in &cfg.eval.datasets {
            let Some(family) = best(dataset) else { continue };
            let pool = &pooled[&(dataset, family)];
            let (sp, st): (Vec<f64>, Vec<LeaningLabel>) = pool.oof.iter().map(|s| (s.p_right, s.label)).unzip();
            let (tp, tt): (Vec<f64>, Vec<LeaningLabel>) = pool.test.iter().map(|s| (s.p_right, s.label)).unzip();
            for row in select_and_apply(&sp, &st, &tp, &tt, &targets) {
                report.thresholds.push(ThresholdReportRow {
                    dataset,
                    classifier: family,
                    target: row.target,
                    tau: row.tau,
                    precision: row.metrics.map(|m| m.precision),
                    recall: row.metrics.map(|m| m.recall),
                    f1: row.metrics.map(|m| m.f1),
                    unknown_fraction: row.metrics.map(|m| m.unknown_fraction),
                });
            }
        }
    } else {
        log::info!("eval: cross validation disabled; no threshold table");
    }

    for dataset in [Dataset::NonPol, Dataset::Pol] {
        if !cfg.eval.datasets.contains(&dataset) {
            continue;
        }
        let Some(family) = best(dataset) else { continue };
        let pool = &pooled[&(dataset, family)];
        let p_true: Vec<f64> = pool
            .test
            .iter()
            .map(|s| if s.label == LeaningLabel::Right { s.p_right } else { 1.0 - s.p_right })
            .collect();
        let tokens = |d: &DocumentStats| match dataset {
            Dataset::Pol => d.political_tokens,
            _ => d.nonpolitical_tokens,
        } as f64;
        let quantities: [(&str, Vec<f64>); 3] = [
            ("political_activity", pool.test.iter().map(|s| docs[s.user_id.as_str()].activity).collect()),
            ("tokens", pool.test.iter().map(|s| tokens(docs[s.user_id.as_str()])).collect()),
            ("leaning_strength", pool.test.iter().map(|s| by_id[s.user_id.as_str()].normalized_score.abs()).collect()),
        ];
        for (name, values) in quantities {
            match pearson(&p_true, &values) {
                Ok(r) => report.correlations.push(CorrelationRow {
                    quantity: format!("{dataset} {family} {name}"),
                    r,
                    n: values.len(),
                }),
                Err(e) => log::warn!("eval: no correlation for {dataset} {family} {name}: {e}"),
            }
        }
    }

    if cfg.eval.datasets.contains(&Dataset::NonPolNet) {
        let family = if cfg.eval.classifiers.contains(&Family::SvmPoly) { Some(Family::SvmPoly) } else { best(Dataset::NonPolNet) };
        if let (Some(family), Some(sp)) = (family, splits.first()) {
            let feats = SampleFeatures::load(cfg, sp.sample, &network)?;
            let x = feats.matrix(Dataset::NonPolNet, &sp.test)?;
            let model = read_model(&model_path(cfg, sp.sample, Dataset::NonPolNet, family))?;
            let imp = permutation_importance(&model, &x, &labels_of(&by_id, &sp.test), cfg.eval.importance_repeats, sp.seed)?;
            let accounts: BTreeSet<&str> = network.col_ids().iter().map(String::as_str).collect();
            let mut friends: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            for i in 0..network.n_rows() {
                let (idx, _) = network.row(i);
                friends.insert(network.row_ids()[i].clone(), idx.iter().map(|&c| network.col_ids()[c].clone()).collect());
            }
            let labels: BTreeMap<String, LeaningLabel> = population(&users).iter().map(|u| (u.user_id.clone(), u.label)).collect();
            for i in imp.into_iter().filter(|i| accounts.contains(i.feature.as_str())).take(cfg.eval.top_accounts) {
                let (left_pct, right_pct) = follow_shares(&i.feature, &labels, &friends);
                report.follow_shares.push(FollowShareRow { account: i.feature, importance: i.importance, left_pct, right_pct });
            }
        }
    }

    let path = dir.join("report.json");
    finish(create(&path)?, &path, |w| report.write_json(w))?;
    for (name, f) in [
        ("cross_validation.csv", EvalReport::write_cv_csv::<BufWriter<File>> as fn(&EvalReport, BufWriter<File>) -> Result<()>),
        ("test.csv", EvalReport::write_test_csv),
        ("thresholds.csv", EvalReport::write_threshold_csv),
        ("correlations.csv", EvalReport::write_correlation_csv),
        ("follow_shares.csv", EvalReport::write_follow_share_csv),
    ] {
        let path = dir.join(name);
        finish(create(&path)?, &path, |w| f(&report, w))?;
    }
    for &dataset in &cfg.eval.datasets {
        for &family in &cfg.eval.classifiers {
            if let Some(m) = report.mean_test(dataset, family) {
                log::info!("eval: {dataset} {family}: F1 {:.3} (P {:.3}, R {:.3})", m.f1, m.precision, m.recall);
            }
        }
    }
    write_manifest(cfg, &cfg.output_dir, Stage::Eval, &[artifact(cfg, Stage::Train, "manifest.json")?])?;
    Ok(report)
}

/// Which trained model to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelChoice {
    pub sample: usize,
    pub dataset: Dataset,
    pub classifier: Family,
    pub tau: f64,
}

/// Applies one trained model to every ingested user with the features it
/// needs.
pub fn predict(cfg: &RunConfig, choice: ModelChoice) -> Result<Vec<Prediction>> {
    cfg.validate(Stage::Predict)?;
    if !(0.5..1.0).contains(&choice.tau) {
        return Err(Error::config("tau", "must lie in [0.5,1)"));
    }
    let users = read_users(cfg)?;
    let network = load_dfm(cfg, "network")?;
    let model_file = artifact(cfg, Stage::Train, &format!("sample_{}/{}/{}.json", choice.sample, choice.dataset, choice.classifier))?;
    let model = read_model(&model_file)?;
    let ids: Vec<String> = if choice.dataset.uses_network() {
        population(&users).iter().map(|u| u.user_id.clone()).collect()
    } else {
        users.iter().map(|u| u.user_id.clone()).collect()
    };
    let theta = match TextKind::of(choice.dataset) {
        Some(kind) => {
            let tm = read_topic_model(cfg, choice.sample, kind)?;
            Some(tm.infer(&load_dfm(cfg, kind.name())?.select_rows(&ids)?).to_features()?)
        }
        None => None,
    };
    let x = dataset_features(choice.dataset, theta.as_ref(), &network, &ids)?;
    let preds: Vec<Prediction> = x
        .row_ids()
        .iter()
        .zip(model.predict_matrix(&x)?)
        .map(|(id, p)| Prediction { user_id: id.clone(), p_right: p, label: classify::apply_threshold(p, choice.tau) })
        .collect();
    let dir = fresh_dir(cfg, Stage::Predict)?;
    write_json(&dir.join("choice.json"), &choice)?;
    let path = dir.join("predictions.csv");
    finish(create(&path)?, &path, |w| write_predictions(w, &preds))?;
    write_manifest(cfg, &cfg.output_dir, Stage::Predict, &[model_file])?;
    Ok(preds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsSummary {
    pub users: usize,
    pub share_events: usize,
    pub text_empty_users: usize,
    pub unknown: usize,
    pub unmatched_events: usize,
}

pub fn newsstudy(cfg: &RunConfig) -> Result<crate::newsstudy::NewsTable> {
    cfg.validate(Stage::Newsstudy)?;
    let n = &cfg.news;
    let patterns = match &cfg.inputs.patterns {
        Some(p) => load_patterns(p)?,
        None => default_patterns(),
    };
    let shares_path = input(&cfg.inputs.shares);
    let events = load_share_events(&shares_path)?.records;
    let tweets_path = input(&cfg.inputs.news_tweets);
    let tweets = load_tweets(&tweets_path)?.records;
    let news_friends = match &cfg.inputs.news_friends {
        Some(p) => load_friend_map(p)?,
        None => BTreeMap::new(),
    };
    let model_file = artifact(cfg, Stage::Train, &format!("sample_{}/{}/{}.json", n.sample, n.dataset, n.classifier))?;
    let model = read_model(&model_file)?;
    let network = load_dfm(cfg, "network")?;

    let sharers: BTreeSet<String> = events.iter().map(|e| e.user_id.clone()).collect();
    let pipeline = TextPipeline::new(smart_stopwords().clone(), cfg.features.stopword_order, cfg.features.ngram_orders.clone());
    let mut docs: BTreeMap<String, Vec<String>> = sharers.iter().map(|u| (u.clone(), Vec::new())).collect();
    for t in &tweets {
        if let Some(d) = docs.get_mut(&t.user_id) {
            d.extend(pipeline.tweet_features(&t.text));
        }
    }
    let mut flagged: BTreeSet<String> = BTreeSet::new();
    let theta = match TextKind::of(n.dataset) {
        Some(kind) => {
            let vocab = load_dfm(cfg, kind.name())?.col_ids().to_vec();
            let proj = project_features(&docs, &vocab, n.min_total_freq)?;
            flagged.extend(proj.empty_users.iter().cloned());
            let tm = read_topic_model(cfg, n.sample, kind)?;
            Some(tm.infer(&proj.dfm).to_features()?)
        }
        None => None,
    };
    let sharer_friends: BTreeMap<String, BTreeSet<String>> =
        news_friends.into_iter().filter(|(u, _)| sharers.contains(u)).collect();
    let net = project_network(&sharer_friends, network.col_ids())?;
    let usable: Vec<String> = sharers
        .iter()
        .filter(|u| !n.dataset.uses_network() || sharer_friends.contains_key(*u))
        .cloned()
        .collect();
    let empty = FeatureMatrix::new(Vec::new(), Vec::new(), Vec::new(), Vec::new())?;
    let x = if usable.is_empty() { empty } else { dataset_features(n.dataset, theta.as_ref(), &net, &usable)? };
    let fallback_model = if n.dataset != Dataset::Net && n.dataset.uses_network() {
        let p = model_path(cfg, n.sample, Dataset::Net, n.classifier);
        if p.is_file() { Some(read_model(&p)?) } else { None }
    } else {
        None
    };
    let fallback_x = FeatureMatrix::from_network(&net);
    let fallback = fallback_model.as_ref().map(|m| NetworkFallback { model: m, features: &fallback_x });
    let all_users: Vec<String> = sharers.iter().cloned().collect();
    let preds = classify_sharers(&all_users, &model, &x, &flagged, fallback, n.tau)?;
    let table = counts_table(&events, &patterns, &preds, n.count_mode);

    let dir = fresh_dir(cfg, Stage::Newsstudy)?;
    let path = dir.join("predictions.csv");
    finish(create(&path)?, &path, |w| write_predictions(w, &preds))?;
    let path = dir.join("table.csv");
    finish(create(&path)?, &path, |w| table.write_csv(w))?;
    let path = dir.join("table.txt");
    std::fs::write(&path, table.to_text()).map_err(|e| Error::io(&path, e))?;
    let summary = NewsSummary {
        users: all_users.len(),
        share_events: events.len(),
        text_empty_users: flagged.len(),
        unknown: preds.iter().filter(|p| p.label == PredLabel::Unknown).count(),
        unmatched_events: table.unmatched_events,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    log::info!("newsstudy: {} sharers, {} unknown", summary.users, summary.unknown);
    let mut inputs = vec![shares_path, tweets_path, model_file];
    inputs.extend(cfg.inputs.news_friends.clone());
    inputs.extend(cfg.inputs.patterns.clone());
    write_manifest(cfg, &cfg.output_dir, Stage::Newsstudy, &inputs)?;
    Ok(table)
}

/// Every stage from ingestion to evaluation, then the news study when its
/// inputs are configured.
pub fn run_all(cfg: &RunConfig) -> Result<EvalReport> {
    ingest(cfg)?;
    lexicon(cfg)?;
    dfm(cfg)?;
    topics(cfg)?;
    train(cfg)?;
    let report = eval(cfg)?;
    if cfg.inputs.news_tweets.is_some() && cfg.inputs.shares.is_some() {
        newsstudy(cfg)?;
    }
    Ok(report)
}
