//! Text preprocessing and feature matrices: tokenization, stemming, stop
//! words, n-grams, sparse document-feature matrices, follow networks and
//! hybrid feature joins.

mod dfm;
mod features;
mod network;
mod ngrams;
mod porter;
mod stopwords;
mod tokenize;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use dfm::{build_dfm, trim_sparse, DfmBuilder, DfmHeader, DfmKind, SparseDfm};
pub use features::{join_features, ColumnKind, FeatureMatrix};
pub use network::build_network_matrix;
pub use ngrams::build_ngrams;
pub use porter::porter_stem;
pub use stopwords::smart_stopwords;
pub use tokenize::{match_tokens, strip_urls, tokenize};

/// Whether stop words are removed from raw tokens or from their stems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopwordOrder {
    #[default]
    BeforeStemming,
    AfterStemming,
}

/// Tokenize, stem, drop stop words and assemble n-grams.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    stopwords: HashSet<String>,
    stemmed_stopwords: HashSet<String>,
    pub order: StopwordOrder,
    pub ngram_orders: Vec<usize>,
}

impl Default for TextPipeline {
    fn default() -> Self {
        Self::new(smart_stopwords().clone(), StopwordOrder::BeforeStemming, vec![1, 2, 3])
    }
}

impl TextPipeline {
    pub fn new(stopwords: HashSet<String>, order: StopwordOrder, ngram_orders: Vec<usize>) -> Self {
        let stemmed_stopwords = stopwords.iter().map(|w| porter_stem(w)).collect();
        Self {
            stopwords,
            stemmed_stopwords,
            order,
            ngram_orders,
        }
    }

    /// Stems of one tweet after stop-word removal.
    pub fn stems(&self, text: &str) -> Vec<String> {
        let tokens = tokenize(text);
        match self.order {
            StopwordOrder::BeforeStemming => tokens
                .into_iter()
                .filter(|t| !self.stopwords.contains(t))
                .map(|t| porter_stem(&t))
                .collect(),
            StopwordOrder::AfterStemming => tokens
                .into_iter()
                .map(|t| porter_stem(&t))
                .filter(|s| !self.stemmed_stopwords.contains(s))
                .collect(),
        }
    }

    /// N-gram features of one tweet.
    pub fn tweet_features(&self, text: &str) -> Vec<String> {
        build_ngrams(&self.stems(text), &self.ngram_orders)
    }

    /// N-gram features of a sequence of tweets; n-grams never span tweets.
    pub fn document_features<'a, I>(&self, tweets: I) -> Vec<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        tweets
            .into_iter()
            .flat_map(|t| self.tweet_features(t))
            .collect()
    }
}
