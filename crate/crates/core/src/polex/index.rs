//! Election-versus-routine term frequencies and seed extraction.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::lexicon::{Lexicon, Provenance};
use crate::corpus::{ElectionPeriod, Tweet};
use crate::textprep::match_tokens;

/// ρ(w) = (out(w)/T_out) / (in(w)/T_in). Terms never seen inside an
/// election window are left out.
pub fn political_index(
    counts_in: &BTreeMap<String, usize>,
    counts_out: &BTreeMap<String, usize>,
    t_in: usize,
    t_out: usize,
) -> BTreeMap<String, f64> {
    assert!(t_in > 0 && t_out > 0, "tweet totals must be positive");
    counts_in
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c_in)| {
            let c_out = counts_out.get(w).copied().unwrap_or(0);
            let rate_in = c_in as f64 / t_in as f64;
            let rate_out = c_out as f64 / t_out as f64;
            (w.clone(), rate_out / rate_in)
        })
        .collect()
}

/// Distinct-tweet term counts split by election membership.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TermCounts {
    pub counts_in: BTreeMap<String, usize>,
    pub counts_out: BTreeMap<String, usize>,
    pub t_in: usize,
    pub t_out: usize,
    /// In-window distinct-tweet counts per named period.
    pub per_period: BTreeMap<String, BTreeMap<String, usize>>,
}

impl TermCounts {
    /// Largest single-period distinct-tweet count of each term.
    pub fn max_period_counts(&self) -> BTreeMap<String, usize> {
        let mut out: BTreeMap<String, usize> = BTreeMap::new();
        for counts in self.per_period.values() {
            for (w, &c) in counts {
                let e = out.entry(w.clone()).or_insert(0);
                *e = (*e).max(c);
            }
        }
        out
    }

    pub fn index(&self) -> BTreeMap<String, f64> {
        if self.t_in == 0 || self.t_out == 0 {
            return BTreeMap::new();
        }
        political_index(&self.counts_in, &self.counts_out, self.t_in, self.t_out)
    }
}

/// Counts, for every match token, the tweets it occurs in, inside and
/// outside the election windows.
pub fn count_terms<'a, I>(tweets: I, periods: &[ElectionPeriod]) -> TermCounts
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut tc = TermCounts::default();
    for p in periods {
        tc.per_period.entry(p.name.clone()).or_default();
    }
    for t in tweets {
        let tokens: BTreeSet<String> = match_tokens(&t.text).into_iter().collect();
        let hits: Vec<&ElectionPeriod> = periods.iter().filter(|p| p.contains(&t.timestamp)).collect();
        let target = if hits.is_empty() {
            tc.t_out += 1;
            &mut tc.counts_out
        } else {
            tc.t_in += 1;
            &mut tc.counts_in
        };
        for w in &tokens {
            *target.entry(w.clone()).or_insert(0) += 1;
        }
        for p in hits {
            let m = tc.per_period.get_mut(&p.name).expect("period registered");
            for w in &tokens {
                *m.entry(w.clone()).or_insert(0) += 1;
            }
        }
    }
    tc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedParams {
    pub min_tweets: usize,
    pub threshold: f64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams {
            min_tweets: 250,
            threshold: 0.25,
        }
    }
}

pub fn extract_seeds(
    index: &BTreeMap<String, f64>,
    distinct_tweet_counts: &BTreeMap<String, usize>,
    params: SeedParams,
    denylist: &HashSet<&str>,
    manual_add: &BTreeSet<String>,
) -> Lexicon {
    let mut lex = Lexicon::default();
    for (w, &rho) in index {
        let n = distinct_tweet_counts.get(w).copied().unwrap_or(0);
        if n >= params.min_tweets && rho < params.threshold && !denylist.contains(w.as_str()) {
            lex.insert(w.clone(), Some(rho), Provenance::Seed);
        }
    }
    for w in manual_add {
        if !denylist.contains(w.as_str()) {
            lex.insert(w.clone(), index.get(w).copied(), Provenance::Manual);
        }
    }
    lex
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn m(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn index_examples() {
        let idx = political_index(
            &m(&[("vote", 10), ("tory", 5), ("tea", 2)]),
            &m(&[("vote", 10), ("tea", 20)]),
            1000,
            10000,
        );
        assert!((idx["vote"] - 0.1).abs() < 1e-12);
        assert_eq!(idx["tory"], 0.0);
        assert!((idx["tea"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_in_count_excluded() {
        let idx = political_index(&m(&[("a", 0)]), &m(&[("a", 3)]), 1, 1);
        assert!(idx.is_empty());
    }

    #[test]
    fn seed_boundaries() {
        let index: BTreeMap<String, f64> = [("a", 0.24), ("b", 0.25), ("youtuber", 0.01), ("c", 0.1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let counts = m(&[("a", 250), ("b", 1000), ("youtuber", 1000), ("c", 249)]);
        let deny: HashSet<&str> = ["youtuber"].into_iter().collect();
        let manual: BTreeSet<String> = ["brexit".to_string()].into_iter().collect();
        let lex = extract_seeds(&index, &counts, SeedParams::default(), &deny, &manual);
        assert!(lex.contains("a"));
        assert!(!lex.contains("b") && !lex.contains("youtuber") && !lex.contains("c"));
        assert_eq!(lex.get("brexit").unwrap().provenance, Provenance::Manual);
        assert_eq!(lex.get("brexit").unwrap().rho, None);
    }

    #[test]
    fn counting_splits_windows() {
        let periods = vec![ElectionPeriod {
            name: "E".into(),
            start: "2015-01-01".parse().unwrap(),
            end: "2015-01-31".parse().unwrap(),
        }];
        let tw = |d: u32, m: u32, text: &str| Tweet {
            user_id: "u".into(),
            timestamp: Utc.with_ymd_and_hms(2015, m, d, 0, 0, 0).unwrap(),
            text: text.into(),
            detected_language: None,
        };
        let tweets = vec![tw(2, 1, "vote vote #GE"), tw(3, 1, "vote tea"), tw(2, 3, "tea")];
        let tc = count_terms(&tweets, &periods);
        assert_eq!((tc.t_in, tc.t_out), (2, 1));
        assert_eq!(tc.counts_in["vote"], 2);
        assert_eq!(tc.counts_in["#ge"], 1);
        assert_eq!(tc.max_period_counts()["tea"], 1);
        let idx = tc.index();
        assert!((idx["tea"] - 2.0).abs() < 1e-12);
        assert_eq!(idx["vote"], 0.0);
    }

    proptest! {
        #[test]
        fn index_scale_invariant(cin in 1usize..50, cout in 0usize..50, tin in 50usize..200, tout in 50usize..200, k in 1usize..7) {
            let a = political_index(&m(&[("w", cin)]), &m(&[("w", cout)]), tin, tout);
            let b = political_index(&m(&[("w", cin * k)]), &m(&[("w", cout)]), tin * k, tout);
            prop_assert!((a["w"] - b["w"]).abs() <= 1e-12 * a["w"].max(1.0));
        }

        #[test]
        fn seeds_antitone_in_threshold(rhos in proptest::collection::vec(0.0..1.0f64, 1..30), t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let index: BTreeMap<String, f64> = rhos.iter().enumerate().map(|(i, &r)| (format!("w{i}"), r)).collect();
            let counts: BTreeMap<String, usize> = index.keys().map(|k| (k.clone(), 300)).collect();
            let none = HashSet::new();
            let empty = BTreeSet::new();
            let a = extract_seeds(&index, &counts, SeedParams { min_tweets: 250, threshold: lo }, &none, &empty);
            let b = extract_seeds(&index, &counts, SeedParams { min_tweets: 250, threshold: hi }, &none, &empty);
            prop_assert!(a.terms().all(|t| b.contains(t)));
        }
    }
}
