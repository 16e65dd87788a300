//! Synthetic corpora with planted truth: users with a known leaning, topic
//! mixtures shifted by class, election-window political vocabulary, a
//! homophilous follow graph, VAA results and news shares.

mod words;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::corpus::{default_periods, write_friends, write_tweets, ElectionPeriod, LeaningLabel, Tweet, VaaResult, VaaSource};
use crate::error::{Error, Result};
use crate::newsstudy::{default_patterns, NewsType, ShareEvent, Source};

pub use words::pseudo_words;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_users: usize,
    /// Share of users labelled Right.
    pub right_fraction: f64,
    pub k_topics: usize,
    /// Distinct word types, political words included.
    pub vocab_size: usize,
    /// Weight of the class-designated topics in every user's mixture.
    pub delta: f64,
    pub political_lexicon_fraction: f64,
    pub homophily: f64,
    pub tweets_per_user: [usize; 2],
    pub seed: u64,
    /// Designated topics per class.
    pub designated_topics: usize,
    /// Symmetric Dirichlet parameter of the per-user topic mixture.
    pub topic_concentration: f64,
    /// Probability of each topic's anchor word within that topic.
    pub anchor_mass: f64,
    pub tokens_per_tweet: [usize; 2],
    /// Probability that a tweet is timestamped inside an election window.
    pub election_share: f64,
    pub political_rate_in: f64,
    pub political_rate_out: f64,
    pub political_words_per_tweet: usize,
    pub hubs_per_class: usize,
    pub neutral_hubs: usize,
    pub background_accounts: usize,
    pub background_follows: usize,
    pub missing_network_fraction: f64,
    pub non_english_fraction: f64,
    pub url_fraction: f64,
    pub n_news_users: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 800,
            right_fraction: 0.4,
            k_topics: 10,
            vocab_size: 2000,
            delta: 0.3,
            political_lexicon_fraction: 0.01,
            homophily: 0.8,
            tweets_per_user: [100, 200],
            seed: 7,
            designated_topics: 2,
            topic_concentration: 1.0,
            anchor_mass: 0.02,
            tokens_per_tweet: [6, 12],
            election_share: 0.35,
            political_rate_in: 0.5,
            political_rate_out: 0.03,
            political_words_per_tweet: 2,
            hubs_per_class: 10,
            neutral_hubs: 5,
            background_accounts: 2000,
            background_follows: 20,
            missing_network_fraction: 0.02,
            non_english_fraction: 0.02,
            url_fraction: 0.1,
            n_news_users: 200,
            start: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2018, 12, 31).expect("valid date"),
        }
    }
}

fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{field}: {msg}")))
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl SynthSpec {
    pub fn n_political_words(&self) -> usize {
        ((self.vocab_size as f64 * self.political_lexicon_fraction).round() as usize).max(1)
    }

    pub fn n_right(&self) -> usize {
        (self.n_users as f64 * self.right_fraction).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        check(self.n_users >= 10, "n_users", "must be at least 10")?;
        check(self.right_fraction > 0.0 && self.right_fraction < 1.0, "right_fraction", "must lie in (0,1)")?;
        check(self.k_topics >= 1, "k_topics", "must be positive")?;
        check(unit(self.delta), "delta", "must lie in [0,1]")?;
        check(
            self.political_lexicon_fraction > 0.0 && self.political_lexicon_fraction < 0.5,
            "political_lexicon_fraction",
            "must lie in (0,0.5)",
        )?;
        check((0.5..=1.0).contains(&self.homophily), "homophily", "must lie in [0.5,1]")?;
        check(
            self.vocab_size >= self.n_political_words() + 2 * self.k_topics,
            "vocab_size",
            "too small for the topics and political words",
        )?;
        check(
            self.tweets_per_user[0] >= 1 && self.tweets_per_user[0] <= self.tweets_per_user[1],
            "tweets_per_user",
            "needs 1 <= min <= max",
        )?;
        check(
            self.tokens_per_tweet[0] >= 1 && self.tokens_per_tweet[0] <= self.tokens_per_tweet[1],
            "tokens_per_tweet",
            "needs 1 <= min <= max",
        )?;
        check(
            self.designated_topics >= 1 && 2 * self.designated_topics <= self.k_topics,
            "designated_topics",
            "needs 1 <= 2 * designated_topics <= k_topics",
        )?;
        check(self.topic_concentration > 0.0, "topic_concentration", "must be positive")?;
        check(self.anchor_mass > 0.0 && self.anchor_mass < 1.0, "anchor_mass", "must lie in (0,1)")?;
        for (name, v) in [
            ("election_share", self.election_share),
            ("political_rate_in", self.political_rate_in),
            ("political_rate_out", self.political_rate_out),
            ("missing_network_fraction", self.missing_network_fraction),
            ("non_english_fraction", self.non_english_fraction),
            ("url_fraction", self.url_fraction),
        ] {
            check(unit(v), name, "must lie in [0,1]")?;
        }
        check(self.political_words_per_tweet >= 1, "political_words_per_tweet", "must be positive")?;
        check(self.hubs_per_class >= 1, "hubs_per_class", "must be positive")?;
        check(self.background_follows <= self.background_accounts, "background_follows", "exceeds background_accounts")?;
        check(self.start < self.end, "end", "must follow start")?;
        let windows = self.windows(&default_periods());
        check(!windows.is_empty(), "start", "the time span misses every election window")?;
        Ok(())
    }

    fn span(&self) -> (i64, i64) {
        let s = Utc.from_utc_datetime(&self.start.and_hms_opt(0, 0, 0).expect("midnight"));
        let e = Utc.from_utc_datetime(&self.end.and_hms_opt(23, 59, 59).expect("valid time"));
        (s.timestamp(), e.timestamp())
    }

    /// Election windows clipped to the generated time span, as second ranges.
    fn windows(&self, periods: &[ElectionPeriod]) -> Vec<(i64, i64)> {
        let (s, e) = self.span();
        periods
            .iter()
            .filter_map(|p| {
                let ps = Utc.from_utc_datetime(&p.start.and_hms_opt(0, 0, 0)?).timestamp();
                let pe = Utc.from_utc_datetime(&p.end.and_hms_opt(23, 59, 59)?).timestamp();
                let (a, b) = (ps.max(s), pe.min(e));
                (a < b).then_some((a, b))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hubs {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub neutral: Vec<String>,
}

/// Everything the generator decided, for use as a test oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub spec: SynthSpec,
    pub labels: BTreeMap<String, LeaningLabel>,
    pub news_labels: BTreeMap<String, LeaningLabel>,
    /// Topic vocabulary; β columns follow this order.
    pub topic_words: Vec<String>,
    pub political_words: Vec<String>,
    pub anchors: Vec<String>,
    pub beta: Vec<Vec<f64>>,
    pub left_topics: Vec<usize>,
    pub right_topics: Vec<usize>,
    pub hubs: Hubs,
    pub non_english_users: Vec<String>,
    pub users_without_network: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub tweets: Vec<Tweet>,
    pub friends: BTreeMap<String, BTreeSet<String>>,
    pub vaa: Vec<VaaResult>,
    pub news_tweets: Vec<Tweet>,
    pub news_friends: BTreeMap<String, BTreeSet<String>>,
    pub shares: Vec<ShareEvent>,
    pub periods: Vec<ElectionPeriod>,
    pub truth: PlantedTruth,
}

/// Paths of the files written by [`SynthData::write`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFiles {
    pub tweets: PathBuf,
    pub friends: PathBuf,
    pub vaa: PathBuf,
    pub periods: PathBuf,
    pub news_tweets: PathBuf,
    pub news_friends: PathBuf,
    pub shares: PathBuf,
    pub truth: PathBuf,
}

impl SynthFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SynthFiles {
            tweets: dir.join("tweets.jsonl"),
            friends: dir.join("friends.jsonl"),
            vaa: dir.join("vaa.csv"),
            periods: dir.join("periods.json"),
            news_tweets: dir.join("news_tweets.jsonl"),
            news_friends: dir.join("news_friends.jsonl"),
            shares: dir.join("shares.jsonl"),
            truth: dir.join("truth.json"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

impl SynthData {
    pub fn write(&self, dir: &Path) -> Result<SynthFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = SynthFiles::in_dir(dir);
        write_tweets(create(&files.tweets)?, &self.tweets)?;
        write_friends(create(&files.friends)?, &self.friends)?;
        crate::corpus::write_vaa(create(&files.vaa)?, &self.vaa)?;
        write_tweets(create(&files.news_tweets)?, &self.news_tweets)?;
        write_friends(create(&files.news_friends)?, &self.news_friends)?;
        let mut w = create(&files.shares)?;
        for s in &self.shares {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n").map_err(|e| Error::io(&files.shares, e))?;
        }
        w.flush().map_err(|e| Error::io(&files.shares, e))?;
        let mut w = create(&files.periods)?;
        serde_json::to_writer_pretty(&mut w, &self.periods)?;
        w.flush().map_err(|e| Error::io(&files.periods, e))?;
        let mut w = create(&files.truth)?;
        serde_json::to_writer(&mut w, &self.truth)?;
        w.flush().map_err(|e| Error::io(&files.truth, e))?;
        Ok(files)
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, alpha: f64, n: usize) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).expect("positive shape");
    let x: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Fixed parts of the world shared by all users.
struct World<'a> {
    spec: &'a SynthSpec,
    topic_words: Vec<String>,
    political_words: Vec<String>,
    topic_samplers: Vec<WeightedAliasIndex<f64>>,
    left_topics: Vec<usize>,
    right_topics: Vec<usize>,
    fillers: Vec<String>,
    windows: Vec<(i64, i64)>,
    window_pick: WeightedAliasIndex<f64>,
    span: (i64, i64),
    hubs: Hubs,
    background: Vec<String>,
}

const SPANISH_FILLERS: &[&str] = &["el", "la", "de", "que", "y", "en", "los", "se", "del", "las", "por", "un", "para", "con", "una", "su", "al", "lo", "como", "pero"];

struct UserOutput {
    tweets: Vec<Tweet>,
    friends: Option<BTreeSet<String>>,
    non_english: bool,
}

impl World<'_> {
    fn timestamp(&self, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
        let (a, b) = if rng.random::<f64>() < self.spec.election_share {
            self.windows[self.window_pick.sample(rng)]
        } else {
            self.span
        };
        Utc.timestamp_opt(rng.random_range(a..=b), 0).single().expect("in range")
    }

    fn in_window(&self, ts: &DateTime<Utc>) -> bool {
        let t = ts.timestamp();
        self.windows.iter().any(|&(a, b)| a <= t && t <= b)
    }

    fn theta(&self, rng: &mut ChaCha8Rng, label: LeaningLabel) -> Vec<f64> {
        let k = self.spec.k_topics;
        let base = dirichlet(rng, self.spec.topic_concentration, k);
        let designated = if label == LeaningLabel::Right { &self.right_topics } else { &self.left_topics };
        let shift = dirichlet(rng, self.spec.topic_concentration, designated.len());
        let mut theta: Vec<f64> = base.iter().map(|b| (1.0 - self.spec.delta) * b).collect();
        for (&t, s) in designated.iter().zip(shift) {
            theta[t] += self.spec.delta * s;
        }
        theta
    }

    fn user(&self, rng: &mut ChaCha8Rng, user_id: &str, label: LeaningLabel) -> UserOutput {
        let spec = self.spec;
        let non_english = rng.random::<f64>() < spec.non_english_fraction;
        let missing_network = rng.random::<f64>() < spec.missing_network_fraction;
        let theta = self.theta(rng, label);
        let topic_pick = WeightedAliasIndex::new(theta).expect("valid mixture");
        let n_tweets = rng.random_range(spec.tweets_per_user[0]..=spec.tweets_per_user[1]);
        let mut tweets = Vec::with_capacity(n_tweets);
        for _ in 0..n_tweets {
            let ts = self.timestamp(rng);
            let n_tokens = rng.random_range(spec.tokens_per_tweet[0]..=spec.tokens_per_tweet[1]);
            let mut tokens: Vec<&str> = (0..n_tokens)
                .map(|_| {
                    let z = topic_pick.sample(rng);
                    self.topic_words[self.topic_samplers[z].sample(rng)].as_str()
                })
                .collect();
            let rate = if self.in_window(&ts) { spec.political_rate_in } else { spec.political_rate_out };
            if rng.random::<f64>() < rate {
                for _ in 0..spec.political_words_per_tweet {
                    let w = self.political_words.choose(rng).expect("non-empty");
                    let at = rng.random_range(0..=tokens.len());
                    tokens.insert(at, w);
                }
            }
            let spanish = non_english && rng.random::<f64>() < 0.9;
            for _ in 0..rng.random_range(2..=4) {
                let f = if spanish {
                    *SPANISH_FILLERS.choose(rng).expect("non-empty")
                } else {
                    self.fillers.choose(rng).expect("non-empty").as_str()
                };
                let at = rng.random_range(0..=tokens.len());
                tokens.insert(at, f);
            }
            let mut text = tokens.join(" ");
            if rng.random::<f64>() < spec.url_fraction {
                text.push_str(&format!(" https://t.co/{:08x}", rng.random::<u32>()));
            }
            tweets.push(Tweet {
                user_id: user_id.to_string(),
                timestamp: ts,
                text,
                detected_language: Some(if spanish { "es" } else { "en" }.to_string()),
            });
        }
        tweets.sort_by(|a, b| a.timestamp.cmp(&b.timestamp));

        let friends = (!missing_network).then(|| {
            let h = spec.homophily;
            let (own, other) = if label == LeaningLabel::Right {
                (&self.hubs.right, &self.hubs.left)
            } else {
                (&self.hubs.left, &self.hubs.right)
            };
            let mut f = BTreeSet::new();
            for (hubs, p) in [(own, h), (other, 1.0 - h), (&self.hubs.neutral, 0.5)] {
                for hub in hubs {
                    if rng.random::<f64>() < p {
                        f.insert(hub.clone());
                    }
                }
            }
            f.extend(self.background.choose_multiple(rng, spec.background_follows).cloned());
            f
        });
        UserOutput {
            tweets,
            friends,
            non_english,
        }
    }
}

fn vaa_results(rng: &mut ChaCha8Rng, user_id: &str, label: LeaningLabel) -> Vec<VaaResult> {
    let n = rng.random_range(1..=VaaSource::ALL.len());
    let mut sources: Vec<VaaSource> = VaaSource::ALL.choose_multiple(rng, n).copied().collect();
    sources.sort();
    let sign = if label == LeaningLabel::Right { 1.0 } else { -1.0 };
    let lean = rng.random_range(5.0..60.0);
    sources
        .into_iter()
        .map(|vaa_source| {
            let mid = rng.random_range(35.0..65.0);
            let spread = lean * rng.random_range(0.7..1.3) / 2.0;
            let round = |x: f64| (x * 10.0_f64).round() / 10.0;
            let mut party_matches = BTreeMap::new();
            party_matches.insert("Conservative".to_string(), round(mid + sign * spread));
            party_matches.insert("Labour".to_string(), round(mid - sign * spread));
            for party in ["Green", "Liberal Democrats", "UKIP"] {
                party_matches.insert(party.to_string(), round(rng.random_range(10.0..90.0)));
            }
            VaaResult {
                user_id: user_id.to_string(),
                vaa_source,
                party_matches,
            }
        })
        .collect()
}

fn share_events(rng: &mut ChaCha8Rng, user_id: &str, label: LeaningLabel, spec: &SynthSpec) -> Vec<ShareEvent> {
    let patterns = default_patterns();
    let n = rng.random_range(1..=6);
    (0..n)
        .map(|_| {
            let url = if rng.random::<f64>() < 0.1 {
                format!("https://example.com/story/{}", rng.random_range(0..10_000))
            } else {
                let newstype = if rng.random::<bool>() { NewsType::Political } else { NewsType::Sport };
                let weights = match (newstype, label) {
                    (NewsType::Sport, _) => [1.0, 1.0, 1.0],
                    (NewsType::Political, LeaningLabel::Right) => [0.1, 0.3, 0.6],
                    (NewsType::Political, _) => [0.6, 0.3, 0.1],
                };
                let source = *Source::ALL
                    .choose_weighted(rng, |s| weights[Source::ALL.iter().position(|x| x == s).expect("listed")])
                    .expect("positive weights");
                let options: Vec<_> = patterns.iter().filter(|p| p.source == source && p.newstype == newstype).collect();
                let p = options.choose(rng).expect("default patterns cover every cell");
                format!("https://www.{}story-{}", p.substring, rng.random_range(0..10_000))
            };
            let (a, b) = spec.span();
            let ts = Utc.timestamp_opt(rng.random_range(a..=b), 0).single().expect("in range");
            ShareEvent {
                user_id: user_id.to_string(),
                url,
                timestamp: Some(ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            }
        })
        .collect()
}

fn labels(rng: &mut ChaCha8Rng, n: usize, n_right: usize) -> Vec<LeaningLabel> {
    let mut l: Vec<LeaningLabel> = (0..n)
        .map(|i| if i < n_right { LeaningLabel::Right } else { LeaningLabel::Left })
        .collect();
    l.shuffle(rng);
    l
}

/// Generates the corpus. The output is a pure function of `spec`; every
/// user draws from its own RNG stream.
pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut master = stream(spec.seed, 0);
    let words = pseudo_words(&mut master, spec.vocab_size);
    let n_pol = spec.n_political_words();
    let political_words = words[..n_pol].to_vec();
    let topic_words = words[n_pol..].to_vec();
    let k = spec.k_topics;
    let v = topic_words.len();

    // topic t owns anchor word t exclusively
    let mut beta = Vec::with_capacity(k);
    for t in 0..k {
        let rest = dirichlet(&mut master, 1.0, v - k);
        let mut row = vec![0.0; v];
        row[t] = spec.anchor_mass;
        for (j, r) in rest.into_iter().enumerate() {
            row[k + j] = (1.0 - spec.anchor_mass) * r;
        }
        beta.push(row);
    }
    let topic_samplers = beta
        .iter()
        .map(|row| WeightedAliasIndex::new(row.clone()).expect("valid topic"))
        .collect();
    let d = spec.designated_topics;
    let left_topics: Vec<usize> = (0..d).collect();
    let right_topics: Vec<usize> = (d..2 * d).collect();

    let mut fillers: Vec<String> = crate::corpus::english_function_words().iter().cloned().collect();
    fillers.sort();
    let periods = default_periods();
    let windows = spec.windows(&periods);
    let window_pick = WeightedAliasIndex::new(windows.iter().map(|&(a, b)| (b - a) as f64).collect()).expect("non-empty windows");
    let name = |prefix: &str, n: usize| -> Vec<String> { (1..=n).map(|i| format!("{prefix}{i:02}")).collect() };
    let hubs = Hubs {
        left: name("hub_left_", spec.hubs_per_class),
        right: name("hub_right_", spec.hubs_per_class),
        neutral: name("hub_neutral_", spec.neutral_hubs),
    };
    let background = (1..=spec.background_accounts).map(|i| format!("acct{i:05}")).collect();
    let world = World {
        spec,
        topic_words,
        political_words,
        topic_samplers,
        left_topics,
        right_topics,
        fillers,
        windows,
        window_pick,
        span: spec.span(),
        hubs,
        background,
    };

    let user_labels = labels(&mut master, spec.n_users, spec.n_right());
    let news_user_labels = labels(&mut master, spec.n_news_users, (spec.n_news_users as f64 * spec.right_fraction).round() as usize);

    let width = spec.n_users.max(spec.n_news_users).to_string().len();
    let mut tweets = Vec::new();
    let mut friends = BTreeMap::new();
    let mut vaa = Vec::new();
    let mut truth_labels = BTreeMap::new();
    let mut non_english_users = Vec::new();
    let mut users_without_network = Vec::new();
    for (i, &label) in user_labels.iter().enumerate() {
        let id = format!("u{:0width$}", i + 1);
        let mut rng = stream(spec.seed, 1 + i as u64);
        let out = world.user(&mut rng, &id, label);
        vaa.extend(vaa_results(&mut rng, &id, label));
        tweets.extend(out.tweets);
        match out.friends {
            Some(f) => {
                friends.insert(id.clone(), f);
            }
            None => users_without_network.push(id.clone()),
        }
        if out.non_english {
            non_english_users.push(id.clone());
        }
        truth_labels.insert(id, label);
    }

    let mut news_tweets = Vec::new();
    let mut news_friends = BTreeMap::new();
    let mut shares = Vec::new();
    let mut news_labels = BTreeMap::new();
    for (j, &label) in news_user_labels.iter().enumerate() {
        let id = format!("n{:0width$}", j + 1);
        let mut rng = stream(spec.seed, 1 + (spec.n_users + j) as u64);
        let out = world.user(&mut rng, &id, label);
        shares.extend(share_events(&mut rng, &id, label, spec));
        news_tweets.extend(out.tweets);
        if let Some(f) = out.friends {
            news_friends.insert(id.clone(), f);
        }
        news_labels.insert(id, label);
    }

    let anchors = world.topic_words[..k].to_vec();
    let truth = PlantedTruth {
        spec: spec.clone(),
        labels: truth_labels,
        news_labels,
        topic_words: world.topic_words,
        political_words: world.political_words,
        anchors,
        beta,
        left_topics: world.left_topics,
        right_topics: world.right_topics,
        hubs: world.hubs,
        non_english_users,
        users_without_network,
    };
    Ok(SynthData {
        tweets,
        friends,
        vaa,
        news_tweets,
        news_friends,
        shares,
        periods,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newsstudy::match_url;

    fn small() -> SynthSpec {
        SynthSpec {
            n_users: 60,
            vocab_size: 300,
            k_topics: 4,
            political_lexicon_fraction: 0.05,
            tweets_per_user: [20, 30],
            n_news_users: 10,
            background_accounts: 100,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn class_ratio_and_separable_beta() {
        let spec = small();
        let data = generate(&spec).unwrap();
        let t = &data.truth;
        let right = t.labels.values().filter(|&&l| l == LeaningLabel::Right).count();
        assert!((right as f64 - spec.n_users as f64 * spec.right_fraction).abs() <= 1.0);
        for (k, row) in t.beta.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (j, other) in t.beta.iter().enumerate() {
                if j != k {
                    assert_eq!(other[k], 0.0);
                }
            }
        }
        assert_eq!(t.political_words.len(), 15);
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.tweets, b.tweets);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.shares, b.shares);
        let c = generate(&SynthSpec { seed: 8, ..small() }).unwrap();
        assert_ne!(a.tweets, c.tweets);
    }

    #[test]
    fn perfect_homophily_separates_hubs() {
        let data = generate(&SynthSpec { homophily: 1.0, ..small() }).unwrap();
        for (u, f) in &data.friends {
            let label = data.truth.labels[u];
            let (own, other) = if label == LeaningLabel::Right { ("hub_right", "hub_left") } else { ("hub_left", "hub_right") };
            assert_eq!(f.iter().filter(|a| a.starts_with(own)).count(), 10);
            assert!(!f.iter().any(|a| a.starts_with(other)));
        }
    }

    #[test]
    fn vaa_sign_matches_label() {
        let data = generate(&small()).unwrap();
        let truth = crate::corpus::ground_truth(&data.vaa, Default::default());
        for r in truth.labelled() {
            assert_eq!(r.label, data.truth.labels[&r.user_id]);
        }
        assert_eq!(truth.labelled().count(), 60);
    }

    #[test]
    fn shares_mostly_match_patterns() {
        let data = generate(&small()).unwrap();
        let p = default_patterns();
        let matched = data.shares.iter().filter(|s| match_url(&s.url, &p).is_some()).count();
        assert!(matched * 10 >= data.shares.len() * 7);
    }

    #[test]
    fn invalid_spec_names_field() {
        let e = generate(&SynthSpec { homophily: 0.3, ..small() }).unwrap_err();
        assert!(e.to_string().contains("homophily"));
    }
}
