//! Political lexicon induction and tweet labelling.

mod expand;
mod index;
mod lexicon;
mod skipgram;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use expand::{expand_lexicon, nearest};
pub use index::{count_terms, extract_seeds, political_index, SeedParams, TermCounts};
pub use lexicon::{Lexicon, LexiconEntry, Provenance};
pub use skipgram::{
    build_vocab, sgns_gradients, sgns_loss, train_skipgram, Embedding, SgnsGradients,
    SkipGramConfig,
};

use crate::corpus::{ElectionPeriod, Tweet};
use crate::error::{Error, Result};
use crate::textprep::match_tokens;

const POLITICAL_WORDS: &str = include_str!("../../assets/political_words.txt");
const AMBIGUOUS_WORDS: &str = include_str!("../../assets/ambiguous_words.txt");
const MANUAL_ADDITIONS: &str = include_str!("../../assets/manual_additions.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TweetClass {
    Political,
    NonPolitical,
}

pub fn label_tweet(text: &str, lex: &Lexicon) -> TweetClass {
    if match_tokens(text).iter().any(|t| lex.contains(t)) {
        TweetClass::Political
    } else {
        TweetClass::NonPolitical
    }
}

/// The published final word list, as manual entries.
pub fn published_lexicon() -> Lexicon {
    Lexicon::from_terms(lexicon::word_list(POLITICAL_WORDS), Provenance::Manual)
}

pub fn default_denylist() -> BTreeSet<String> {
    lexicon::word_list(AMBIGUOUS_WORDS)
}

pub fn default_manual_additions() -> BTreeSet<String> {
    lexicon::word_list(MANUAL_ADDITIONS)
}

pub fn load_word_list(path: &std::path::Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(lexicon::word_list(&text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconConfig {
    pub seeds: SeedParams,
    pub skipgram: SkipGramConfig,
    pub expand_k: usize,
    /// Replaces the bundled ambiguous-word list when set.
    pub denylist: Option<PathBuf>,
    /// Replaces the bundled manual additions when set.
    pub manual_additions: Option<PathBuf>,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            seeds: SeedParams::default(),
            skipgram: SkipGramConfig::default(),
            expand_k: 3,
            denylist: None,
            manual_additions: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconSummary {
    pub tweets_in_elections: usize,
    pub tweets_outside: usize,
    pub seeds: usize,
    pub manual: usize,
    pub expanded: usize,
    pub embedding_vocab: usize,
}

/// Seeds from election-period frequencies, expanded through a skip-gram
/// embedding trained on all tweets.
pub fn induce_lexicon(
    tweets: &[Tweet],
    periods: &[ElectionPeriod],
    cfg: &LexiconConfig,
) -> Result<(Lexicon, LexiconSummary)> {
    let denylist = match &cfg.denylist {
        Some(p) => load_word_list(p)?,
        None => default_denylist(),
    };
    let manual = match &cfg.manual_additions {
        Some(p) => load_word_list(p)?,
        None => default_manual_additions(),
    };
    let deny = lexicon::to_hash(&denylist);

    let counts = count_terms(tweets, periods);
    if counts.t_in == 0 || counts.t_out == 0 {
        log::warn!(
            "{} tweets inside election windows, {} outside; political index undefined",
            counts.t_in,
            counts.t_out
        );
    }
    let index = counts.index();
    let seeds = extract_seeds(&index, &counts.max_period_counts(), cfg.seeds, &deny, &manual);
    log::info!("{} seed terms ({} manual)", seeds.len(), seeds.count(Provenance::Manual));

    let corpus: Vec<Vec<String>> = tweets.iter().map(|t| match_tokens(&t.text)).collect();
    let (lexicon, vocab) = match train_skipgram(&corpus, &cfg.skipgram) {
        Ok(emb) => {
            let mut lex = expand_lexicon(&emb, &seeds, cfg.expand_k, &deny);
            let expanded: Vec<String> = lex
                .entries()
                .filter(|e| e.provenance == Provenance::Expanded)
                .map(|e| e.term.clone())
                .collect();
            for t in expanded {
                let rho = index.get(&t).copied();
                lex.remove(&t);
                lex.insert(t, rho, Provenance::Expanded);
            }
            (lex, emb.len())
        }
        Err(Error::EmptyVocabulary { min_freq }) => {
            log::warn!("no token reaches frequency {min_freq}; lexicon not expanded");
            (seeds, 0)
        }
        Err(e) => return Err(e),
    };
    let summary = LexiconSummary {
        tweets_in_elections: counts.t_in,
        tweets_outside: counts.t_out,
        seeds: lexicon.count(Provenance::Seed),
        manual: lexicon.count(Provenance::Manual),
        expanded: lexicon.count(Provenance::Expanded),
        embedding_vocab: vocab,
    };
    Ok((lexicon, summary))
}

/// Per-term ρ for reporting, keyed the same way as the lexicon.
pub fn term_index(tweets: &[Tweet], periods: &[ElectionPeriod]) -> BTreeMap<String, f64> {
    count_terms(tweets, periods).index()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn label_examples() {
        let lex = published_lexicon();
        assert_eq!(label_tweet("big day for #ge2015 canvassing", &lex), TweetClass::Political);
        assert_eq!(label_tweet("lovely sunset over the pier", &lex), TweetClass::NonPolitical);
        assert_eq!(label_tweet("", &lex), TweetClass::NonPolitical);
    }

    #[test]
    fn bundled_lists() {
        assert_eq!(published_lexicon().len(), 433);
        assert!(default_denylist().contains("youtuber"));
        assert!(default_manual_additions().contains("brexit"));
    }

    #[test]
    fn interchangeable_contexts_embed_close() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let left: Vec<String> = (0..8).map(|i| format!("l{i}")).collect();
        let right: Vec<String> = (0..8).map(|i| format!("r{i}")).collect();
        let mut corpus = Vec::new();
        for n in 0..4000 {
            let (ctx, mid) = match n % 3 {
                0 => (&left, "alpha"),
                1 => (&left, "beta"),
                _ => (&right, "gamma"),
            };
            let mut s: Vec<String> = (0..2).map(|_| ctx[rng.random_range(0..8)].clone()).collect();
            s.push(mid.to_string());
            s.extend((0..2).map(|_| ctx[rng.random_range(0..8)].clone()));
            corpus.push(s);
        }
        let cfg = SkipGramConfig { min_freq: 5, dim: 20, epochs: 3, window: 2, ..Default::default() };
        let emb = train_skipgram(&corpus, &cfg).unwrap();
        let ab = emb.cosine("alpha", "beta").unwrap();
        let ag = emb.cosine("alpha", "gamma").unwrap();
        assert!(ab > ag, "cos(alpha,beta)={ab} cos(alpha,gamma)={ag}");
    }

    proptest! {
        #[test]
        fn union_labels_or(a in proptest::collection::btree_set("[a-d]", 0..4), b in proptest::collection::btree_set("[a-d]", 0..4), text in "[a-f ]{0,12}") {
            let l1 = Lexicon::from_terms(a, Provenance::Manual);
            let l2 = Lexicon::from_terms(b, Provenance::Manual);
            let u = label_tweet(&text, &l1.union(&l2)) == TweetClass::Political;
            let either = label_tweet(&text, &l1) == TweetClass::Political || label_tweet(&text, &l2) == TweetClass::Political;
            prop_assert_eq!(u, either);
        }
    }
}
