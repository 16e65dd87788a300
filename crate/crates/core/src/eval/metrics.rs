use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{apply_threshold, ClassifierModel, PredLabel};
use crate::corpus::{LeaningLabel, UserDocument};
use crate::error::{Error, Result};
use crate::textprep::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Fraction of predictions that were Unknown.
    pub unknown_fraction: f64,
    /// Set when some metric had a zero denominator and was reported as 0.
    pub undefined: bool,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall and F1 with Right as the positive class. Unknown
/// predictions are left out of the confusion matrix.
pub fn prf(pred: &[PredLabel], truth: &[LeaningLabel]) -> Prf {
    assert_eq!(pred.len(), truth.len(), "prediction and label lengths differ");
    let (mut tp, mut fp, mut fneg, mut unknown) = (0usize, 0usize, 0usize, 0usize);
    for (p, t) in pred.iter().zip(truth) {
        match (p, t) {
            (PredLabel::Unknown, _) => unknown += 1,
            (PredLabel::Right, LeaningLabel::Right) => tp += 1,
            (PredLabel::Right, _) => fp += 1,
            (PredLabel::Left, LeaningLabel::Right) => fneg += 1,
            (PredLabel::Left, _) => {}
        }
    }
    let mut undefined = false;
    let mut ratio = |a: usize, b: usize| {
        if b == 0 {
            undefined = true;
            0.0
        } else {
            a as f64 / b as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    if precision + recall == 0.0 {
        undefined = true;
    }
    Prf {
        precision,
        recall,
        f1: f1_score(precision, recall),
        unknown_fraction: if pred.is_empty() { 0.0 } else { unknown as f64 / pred.len() as f64 },
        undefined,
    }
}

pub fn prf_at(p_right: &[f64], truth: &[LeaningLabel], tau: f64) -> Prf {
    let pred: Vec<PredLabel> = p_right.iter().map(|&p| apply_threshold(p, tau)).collect();
    prf(&pred, truth)
}

/// τ = 0.50, 0.51, …, 0.99.
pub fn threshold_grid() -> Vec<f64> {
    (50..100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdTarget {
    Base,
    F1(f64),
}

impl ThresholdTarget {
    pub fn name(&self) -> String {
        match self {
            ThresholdTarget::Base => "base".into(),
            ThresholdTarget::F1(t) => format!("{t:.2}"),
        }
    }
}

pub const DEFAULT_TARGETS: [ThresholdTarget; 3] =
    [ThresholdTarget::Base, ThresholdTarget::F1(0.90), ThresholdTarget::F1(0.95)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub target: String,
    /// `None` when no grid value reaches the target.
    pub tau: Option<f64>,
    pub metrics: Option<Prf>,
}

/// Smallest grid τ whose covered-subset F1 reaches the target.
pub fn select_threshold(p_right: &[f64], truth: &[LeaningLabel], target: ThresholdTarget) -> Option<f64> {
    match target {
        ThresholdTarget::Base => Some(0.5),
        ThresholdTarget::F1(goal) => threshold_grid()
            .into_iter()
            .find(|&tau| {
                let m = prf_at(p_right, truth, tau);
                m.unknown_fraction < 1.0 && m.f1 >= goal
            }),
    }
}

pub fn threshold_table(p_right: &[f64], truth: &[LeaningLabel], targets: &[ThresholdTarget]) -> Vec<ThresholdRow> {
    select_and_apply(p_right, truth, p_right, truth, targets)
}

/// Chooses τ per target on one prediction set and reports it on another.
pub fn select_and_apply(
    select_p: &[f64],
    select_truth: &[LeaningLabel],
    report_p: &[f64],
    report_truth: &[LeaningLabel],
    targets: &[ThresholdTarget],
) -> Vec<ThresholdRow> {
    targets
        .iter()
        .map(|&t| {
            let tau = select_threshold(select_p, select_truth, t);
            ThresholdRow {
                target: t.name(),
                tau,
                metrics: tau.map(|tau| prf_at(report_p, report_truth, tau)),
            }
        })
        .collect()
}

pub fn activity_index(doc: &UserDocument) -> Result<f64> {
    if doc.tweet_count == 0 {
        return Err(Error::InvalidInput(format!("user {} has no tweets", doc.user_id)));
    }
    Ok(doc.political_tweet_count as f64 / doc.tweet_count as f64)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidInput(format!("pearson needs equal lengths ≥ 3, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Percent of Left and of Right users who follow `account`.
pub fn follow_shares(
    account: &str,
    labels: &BTreeMap<String, LeaningLabel>,
    friends: &BTreeMap<String, BTreeSet<String>>,
) -> (f64, f64) {
    let (mut n_l, mut n_r, mut f_l, mut f_r) = (0usize, 0usize, 0usize, 0usize);
    for (user, &label) in labels {
        let follows = friends.get(user).is_some_and(|f| f.contains(account));
        match label {
            LeaningLabel::Left => {
                n_l += 1;
                f_l += usize::from(follows);
            }
            LeaningLabel::Right => {
                n_r += 1;
                f_r += usize::from(follows);
            }
            LeaningLabel::Dropped => {}
        }
    }
    let pct = |f: usize, n: usize| if n == 0 { 0.0 } else { 100.0 * f as f64 / n as f64 };
    (pct(f_l, n_l), pct(f_r, n_r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: String,
    pub importance: f64,
}

/// Mean F1 drop (τ = 0.5) when one column is shuffled, over `repeats`
/// shuffles; sorted by importance, ties by feature name.
pub fn permutation_importance(
    model: &ClassifierModel,
    x: &FeatureMatrix,
    y: &[LeaningLabel],
    repeats: usize,
    seed: u64,
) -> Result<Vec<Importance>> {
    let base = prf_at(&model.predict_matrix(x)?, y, 0.5).f1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let original = x.column(j);
        let mut drop = 0.0;
        for _ in 0..repeats {
            let mut perm = original.clone();
            perm.shuffle(&mut rng);
            let mut xp = x.clone();
            for (i, v) in perm.into_iter().enumerate() {
                xp.set(i, j, v);
            }
            drop += base - prf_at(&model.predict_matrix(&xp)?, y, 0.5).f1;
        }
        out.push(Importance {
            feature: x.col_names()[j].clone(),
            importance: drop / repeats.max(1) as f64,
        });
    }
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.feature.cmp(&b.feature)));
    Ok(out)
}
