//! Input data: tweets, follow lists, VAA results, ground-truth leaning and
//! per-user documents.

mod io;
mod language;
mod leaning;
mod types;

use std::collections::{BTreeMap, BTreeSet};

pub use io::{
    default_periods, load_friends, load_periods, load_tweets, load_vaa, parse_friends,
    parse_tweets, parse_vaa, write_friends, write_tweets, write_vaa, FriendsRecord, LineWarning,
    LoadReport,
};
pub use language::{english_function_words, FunctionWordDetector, LanguageDetector};
pub use leaning::{
    compute_leaning, ground_truth, merge_multi_vaa, normalize_score, platform_maxima, raw_score,
    GroundTruth, MergeOutcome, ScoreOrientation,
};
pub use types::{
    ElectionPeriod, LeaningLabel, LeaningRecord, Tweet, UserDocument, UserRecord, VaaResult,
    VaaSource,
};

use crate::polex::{label_tweet, Lexicon, TweetClass};

/// Fills in `detected_language` for tweets that arrived without one.
pub fn detect_languages(tweets: &mut [Tweet], detector: &dyn LanguageDetector) {
    for t in tweets.iter_mut().filter(|t| t.detected_language.is_none()) {
        t.detected_language = Some(detector.detect(&t.text));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct UserFilter {
    pub min_english: f64,
    pub min_tweets: usize,
}

impl Default for UserFilter {
    fn default() -> Self {
        UserFilter {
            min_english: 0.75,
            min_tweets: 100,
        }
    }
}

/// Keeps users with enough tweets, most of them English. Tweets without a
/// language code count as non-English.
pub fn filter_users(users: Vec<UserRecord>, filter: UserFilter) -> Vec<UserRecord> {
    users
        .into_iter()
        .filter(|u| u.tweets.len() >= filter.min_tweets && u.english_fraction() >= filter.min_english)
        .collect()
}

/// Groups tweets by user and attaches follow lists and leaning. Users appear
/// in identifier order; each user's tweets are sorted by timestamp.
pub fn group_users(
    tweets: Vec<Tweet>,
    friends: &BTreeMap<String, BTreeSet<String>>,
    truth: &GroundTruth,
) -> Vec<UserRecord> {
    let mut by_user: BTreeMap<String, Vec<Tweet>> = BTreeMap::new();
    for t in tweets {
        by_user.entry(t.user_id.clone()).or_default().push(t);
    }
    by_user
        .into_iter()
        .map(|(user_id, mut tweets)| {
            tweets.sort_by_key(|t| t.timestamp);
            UserRecord {
                friends: friends.get(&user_id).cloned(),
                leaning: truth.records.get(&user_id).cloned(),
                user_id,
                tweets,
            }
        })
        .collect()
}

pub fn assemble_documents(user: &UserRecord, lexicon: &Lexicon) -> UserDocument {
    let mut order: Vec<&Tweet> = user.tweets.iter().collect();
    order.sort_by_key(|t| t.timestamp);
    let mut political_tweets = Vec::new();
    let mut nonpolitical_tweets = Vec::new();
    for t in order {
        match label_tweet(&t.text, lexicon) {
            TweetClass::Political => political_tweets.push(t.text.clone()),
            TweetClass::NonPolitical => nonpolitical_tweets.push(t.text.clone()),
        }
    }
    UserDocument {
        user_id: user.user_id.clone(),
        tweet_count: political_tweets.len() + nonpolitical_tweets.len(),
        political_tweet_count: political_tweets.len(),
        political_tweets,
        nonpolitical_tweets,
    }
}
