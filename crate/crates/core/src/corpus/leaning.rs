//! Ground-truth leaning from VAA party matches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::types::{LeaningLabel, LeaningRecord, VaaResult, VaaSource};
use crate::error::{Error, Result};

/// Which party's match is subtracted. The default makes positive scores
/// right-leaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreOrientation {
    #[default]
    ConservativeMinusLabour,
    LabourMinusConservative,
}

fn party_match(v: &VaaResult, names: &[&str], party: &'static str) -> Result<f64> {
    v.party_matches
        .iter()
        .find(|(k, _)| {
            let k = k.trim().to_ascii_lowercase();
            names.contains(&k.as_str())
        })
        .map(|(_, &s)| s)
        .ok_or_else(|| Error::MissingParty {
            user_id: v.user_id.clone(),
            party,
        })
}

pub fn raw_score(v: &VaaResult, orientation: ScoreOrientation) -> Result<f64> {
    let con = party_match(v, &["conservative", "conservatives", "con"], "Conservative")?;
    let lab = party_match(v, &["labour", "lab"], "Labour")?;
    Ok(match orientation {
        ScoreOrientation::ConservativeMinusLabour => con - lab,
        ScoreOrientation::LabourMinusConservative => lab - con,
    })
}

pub fn normalize_score(raw: f64, platform_max: f64) -> f64 {
    (raw / platform_max).clamp(-1.0, 1.0)
}

pub fn compute_leaning(
    v: &VaaResult,
    platform_max: f64,
    orientation: ScoreOrientation,
) -> Result<LeaningRecord> {
    if !(platform_max > 0.0 && platform_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "platform_max must be positive, got {platform_max}"
        )));
    }
    let raw = raw_score(v, orientation)?;
    let normalized_score = normalize_score(raw, platform_max);
    Ok(LeaningRecord {
        user_id: v.user_id.clone(),
        raw_score: raw,
        normalized_score,
        label: LeaningLabel::from_score(normalized_score),
    })
}

/// Maximum absolute raw score per platform. Results missing a party are
/// ignored here and surface as errors in `compute_leaning`.
pub fn platform_maxima(
    results: &[VaaResult],
    orientation: ScoreOrientation,
) -> BTreeMap<VaaSource, f64> {
    let mut out = BTreeMap::new();
    for v in results {
        if let Ok(raw) = raw_score(v, orientation) {
            let e = out.entry(v.vaa_source).or_insert(0.0_f64);
            *e = e.max(raw.abs());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum MergeOutcome {
    Merged(LeaningRecord),
    /// Non-dropped labels disagree across platforms.
    Rejected,
}

pub fn merge_multi_vaa(records: &[LeaningRecord]) -> MergeOutcome {
    assert!(!records.is_empty(), "merge_multi_vaa needs at least one record");
    let mut labels = records
        .iter()
        .map(|r| r.label)
        .filter(|&l| l != LeaningLabel::Dropped);
    if let Some(first) = labels.next() {
        if labels.any(|l| l != first) {
            return MergeOutcome::Rejected;
        }
    }
    let n = records.len() as f64;
    let normalized_score = records.iter().map(|r| r.normalized_score).sum::<f64>() / n;
    let raw_score = records.iter().map(|r| r.raw_score).sum::<f64>() / n;
    MergeOutcome::Merged(LeaningRecord {
        user_id: records[0].user_id.clone(),
        raw_score,
        normalized_score,
        label: LeaningLabel::from_score(normalized_score),
    })
}

/// Per-user ground truth after normalization and merging.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Merged records, including users whose score is exactly zero.
    pub records: BTreeMap<String, LeaningRecord>,
    pub rejected: Vec<String>,
    /// Results missing Labour or Conservative, by user.
    pub invalid: Vec<String>,
}

impl GroundTruth {
    pub fn labelled(&self) -> impl Iterator<Item = &LeaningRecord> {
        self.records
            .values()
            .filter(|r| r.label != LeaningLabel::Dropped)
    }
}

pub fn ground_truth(results: &[VaaResult], orientation: ScoreOrientation) -> GroundTruth {
    let maxima = platform_maxima(results, orientation);
    let mut per_user: BTreeMap<&str, Vec<LeaningRecord>> = BTreeMap::new();
    let mut gt = GroundTruth::default();
    for v in results {
        // an all-tie platform has max 0; every raw score on it is 0 as well
        let max = maxima.get(&v.vaa_source).copied().filter(|&m| m > 0.0).unwrap_or(1.0);
        match compute_leaning(v, max, orientation) {
            Ok(r) => per_user.entry(&v.user_id).or_default().push(r),
            Err(e) => {
                log::warn!("{e}");
                gt.invalid.push(v.user_id.clone());
            }
        }
    }
    for (user, recs) in per_user {
        match merge_multi_vaa(&recs) {
            MergeOutcome::Merged(r) => {
                gt.records.insert(user.to_owned(), r);
            }
            MergeOutcome::Rejected => gt.rejected.push(user.to_owned()),
        }
    }
    gt.invalid.sort();
    gt.invalid.dedup();
    gt
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vaa(con: f64, lab: f64) -> VaaResult {
        VaaResult {
            user_id: "u".into(),
            vaa_source: VaaSource::Isw,
            party_matches: [("Conservative".to_string(), con), ("Labour".to_string(), lab)]
                .into_iter()
                .collect(),
        }
    }

    fn rec(s: f64) -> LeaningRecord {
        LeaningRecord {
            user_id: "u".into(),
            raw_score: s,
            normalized_score: s,
            label: LeaningLabel::from_score(s),
        }
    }

    const O: ScoreOrientation = ScoreOrientation::ConservativeMinusLabour;

    #[test]
    fn equal_matches_dropped() {
        let r = compute_leaning(&vaa(70.0, 70.0), 100.0, O).unwrap();
        assert_eq!(r.raw_score, 0.0);
        assert_eq!(r.label, LeaningLabel::Dropped);
    }

    #[test]
    fn extreme_right() {
        let r = compute_leaning(&vaa(100.0, 0.0), 100.0, O).unwrap();
        assert_eq!(r.normalized_score, 1.0);
        assert_eq!(r.label, LeaningLabel::Right);
    }

    #[test]
    fn thirty_ninety() {
        let r = compute_leaning(&vaa(30.0, 90.0), 100.0, O).unwrap();
        assert!((r.normalized_score - -0.6).abs() < 1e-12);
        assert_eq!(r.label, LeaningLabel::Left);
    }

    #[test]
    fn flipped_orientation() {
        let r = compute_leaning(&vaa(30.0, 90.0), 100.0, ScoreOrientation::LabourMinusConservative)
            .unwrap();
        assert_eq!(r.label, LeaningLabel::Right);
    }

    #[test]
    fn missing_party_errors() {
        let mut v = vaa(1.0, 2.0);
        v.party_matches.remove("Labour");
        assert!(matches!(compute_leaning(&v, 1.0, O), Err(Error::MissingParty { party: "Labour", .. })));
    }

    #[test]
    fn merge_examples() {
        match merge_multi_vaa(&[rec(0.4), rec(0.6)]) {
            MergeOutcome::Merged(r) => {
                assert!((r.normalized_score - 0.5).abs() < 1e-12);
                assert_eq!(r.label, LeaningLabel::Right);
            }
            MergeOutcome::Rejected => panic!(),
        }
        assert_eq!(merge_multi_vaa(&[rec(0.4), rec(-0.2)]), MergeOutcome::Rejected);
        assert_eq!(merge_multi_vaa(&[rec(-0.3)]), MergeOutcome::Merged(rec(-0.3)));
    }

    #[test]
    fn ground_truth_normalizes_per_platform() {
        let mut a = vaa(90.0, 10.0);
        a.user_id = "a".into();
        let mut b = vaa(10.0, 50.0);
        b.user_id = "b".into();
        let mut c = vaa(0.0, 20.0);
        c.user_id = "c".into();
        c.vaa_source = VaaSource::Vm;
        let gt = ground_truth(&[a, b, c], O);
        assert_eq!(gt.records["a"].normalized_score, 1.0);
        assert!((gt.records["b"].normalized_score + 0.5).abs() < 1e-12);
        assert_eq!(gt.records["c"].normalized_score, -1.0);
    }

    proptest! {
        #[test]
        fn sign_label_consistency(con in 0.0..=100.0f64, lab in 0.0..=100.0f64, max in 1.0..200.0f64) {
            let r = compute_leaning(&vaa(con, lab), max, O).unwrap();
            prop_assert!((-1.0..=1.0).contains(&r.normalized_score));
            prop_assert_eq!(r.label == LeaningLabel::Right, r.normalized_score > 0.0);
            prop_assert_eq!(r.label == LeaningLabel::Left, r.normalized_score < 0.0);
            prop_assert_eq!(r.label == LeaningLabel::Dropped, r.normalized_score == 0.0);
        }

        #[test]
        fn normalization_idempotent(s in -1.0..=1.0f64) {
            prop_assert_eq!(normalize_score(s, 1.0), s);
        }
    }
}
