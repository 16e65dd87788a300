//! Classifiers over topic proportions, follow bits or both: naive Bayes,
//! SVMs with three kernels and a small neural network, plus the
//! probability threshold that yields Unknown.

mod nb;
mod nn;
mod platt;
mod standardize;
mod svm;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use nb::{train_nb, NbParams};
pub use nn::{loss_and_gradient, train_mlp, MlpParams, NnConfig};
pub use platt::{calibrate, Sigmoid};
pub use standardize::Standardizer;
pub use svm::{fit_svm, gram_matrix, kkt_violation, smo_solve, Kernel, SmoParams, SmoSolution, SvmParams};

use crate::corpus::LeaningLabel;
use crate::error::{Error, Result};
use crate::eval::stratified_folds;
use crate::textprep::FeatureMatrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "NB")]
    Nb,
    #[serde(rename = "SVM_lin")]
    SvmLin,
    #[serde(rename = "SVM_poly")]
    SvmPoly,
    #[serde(rename = "SVM_rad")]
    SvmRad,
    #[serde(rename = "NN")]
    Nn,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Nb, Family::Nn, Family::SvmLin, Family::SvmPoly, Family::SvmRad];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Nb => "NB",
            Family::SvmLin => "SVM_lin",
            Family::SvmPoly => "SVM_poly",
            Family::SvmRad => "SVM_rad",
            Family::Nn => "NN",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown classifier {s:?}; expected one of NB, NN, SVM_lin, SVM_poly, SVM_rad"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub c: f64,
    pub poly_degree: u32,
    pub poly_coef0: f64,
    /// Kernel γ; defaults to 1 / feature width.
    pub gamma: Option<f64>,
    pub svm_eps: f64,
    pub svm_max_iter: usize,
    /// Folds producing the out-of-fold decisions used for Platt scaling.
    pub calibration_folds: usize,
    pub nb_alpha: f64,
    pub nb_var_floor: f64,
    pub nn: NnConfig,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            c: 1.0,
            poly_degree: 3,
            poly_coef0: 1.0,
            gamma: None,
            svm_eps: 1e-3,
            svm_max_iter: 100_000,
            calibration_folds: 10,
            nb_alpha: 1.0,
            nb_var_floor: 1e-9,
            nn: NnConfig::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NbParams),
    Svm(SvmParams),
    Network(MlpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format_version: u32,
    pub family: Family,
    pub feature_width: usize,
    pub feature_names: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub params: ModelParams,
    pub calibration: Option<Sigmoid>,
}

fn targets(y: &[LeaningLabel]) -> Result<Vec<bool>> {
    y.iter()
        .map(|l| match l {
            LeaningLabel::Right => Ok(true),
            LeaningLabel::Left => Ok(false),
            LeaningLabel::Dropped => Err(Error::InvalidInput("training labels must be Left or Right".into())),
        })
        .collect()
}

impl ClassifierConfig {
    fn kernel(&self, family: Family, width: usize) -> Kernel {
        let gamma = self.gamma.unwrap_or(1.0 / width.max(1) as f64);
        match family {
            Family::SvmPoly => Kernel::Poly {
                gamma,
                coef0: self.poly_coef0,
                degree: self.poly_degree,
            },
            Family::SvmRad => Kernel::Rbf { gamma },
            _ => Kernel::Linear,
        }
    }

    fn smo(&self) -> SmoParams {
        SmoParams {
            c: self.c,
            eps: self.svm_eps,
            max_iter: self.svm_max_iter,
        }
    }
}

fn fit_svm_raw(kernel: Kernel, rows: &[&[f64]], y: &[bool], cfg: &ClassifierConfig) -> (Standardizer, SvmParams) {
    let width = rows.first().map_or(0, |r| r.len());
    let std = Standardizer::fit(rows.iter().copied(), width);
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| std.apply(r)).collect();
    let ys: Vec<f64> = y.iter().map(|&r| if r { 1.0 } else { -1.0 }).collect();
    let (svm, _) = fit_svm(kernel, &xs, &ys, &cfg.smo());
    (std, svm)
}

pub fn train(family: Family, x: &FeatureMatrix, y: &[LeaningLabel], cfg: &ClassifierConfig) -> Result<ClassifierModel> {
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    let yb = targets(y)?;
    let n_r = yb.iter().filter(|&&r| r).count();
    if n_r == 0 || n_r == yb.len() {
        return Err(Error::SingleClass(format!("{family} training set")));
    }
    let rows: Vec<&[f64]> = x.rows().collect();
    let width = x.n_cols();
    let (standardizer, params, calibration) = match family {
        Family::Nb => {
            let nb = train_nb(&rows, x.kinds(), &yb, cfg.nb_alpha, cfg.nb_var_floor)?;
            (None, ModelParams::NaiveBayes(nb), None)
        }
        Family::Nn => {
            let std = Standardizer::fit(rows.iter().copied(), width);
            let xs: Vec<Vec<f64>> = rows.iter().map(|r| std.apply(r)).collect();
            let (mlp, _) = train_mlp(&xs, &yb, &cfg.nn)?;
            (Some(std), ModelParams::Network(mlp), None)
        }
        Family::SvmLin | Family::SvmPoly | Family::SvmRad => {
            let kernel = cfg.kernel(family, width);
            let decisions = out_of_fold_decisions(kernel, &rows, &yb, cfg);
            let sigmoid = calibrate(&decisions, &yb)?;
            let (std, svm) = fit_svm_raw(kernel, &rows, &yb, cfg);
            (Some(std), ModelParams::Svm(svm), Some(sigmoid))
        }
    };
    Ok(ClassifierModel {
        format_version: MODEL_FORMAT_VERSION,
        family,
        feature_width: width,
        feature_names: x.col_names().to_vec(),
        standardizer,
        params,
        calibration,
    })
}

/// Decision values for every training row from an SVM that never saw it.
fn out_of_fold_decisions(kernel: Kernel, rows: &[&[f64]], y: &[bool], cfg: &ClassifierConfig) -> Vec<f64> {
    let minority = y.iter().filter(|&&r| r).count().min(y.iter().filter(|&&r| !r).count());
    let k = cfg.calibration_folds.min(minority);
    if k < 2 {
        log::warn!("too few examples for out-of-fold calibration; using in-sample decisions");
        let (std, svm) = fit_svm_raw(kernel, rows, y, cfg);
        return rows.iter().map(|r| svm.decision(&std.apply(r))).collect();
    }
    let labels: Vec<LeaningLabel> = y.iter().map(|&r| if r { LeaningLabel::Right } else { LeaningLabel::Left }).collect();
    let folds = stratified_folds(&labels, k, cfg.seed);
    let mut out = vec![0.0; rows.len()];
    for f in 0..k {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| folds[i] != f);
        let tr: Vec<&[f64]> = train_idx.iter().map(|&i| rows[i]).collect();
        let ty: Vec<bool> = train_idx.iter().map(|&i| y[i]).collect();
        let (std, svm) = fit_svm_raw(kernel, &tr, &ty, cfg);
        for i in test_idx {
            out[i] = svm.decision(&std.apply(rows[i]));
        }
    }
    out
}

impl ClassifierModel {
    fn transformed(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        }
    }

    /// Raw SVM decision value, if this is an SVM.
    pub fn decision(&self, x: &[f64]) -> Result<Option<f64>> {
        self.check_width(x)?;
        Ok(match &self.params {
            ModelParams::Svm(s) => Some(s.decision(&self.transformed(x))),
            _ => None,
        })
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_width {
            return Err(Error::WidthMismatch {
                expected: self.feature_width,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x)?;
        let p = match &self.params {
            ModelParams::NaiveBayes(nb) => nb.p_right(x),
            ModelParams::Network(m) => m.forward(&self.transformed(x))[1],
            ModelParams::Svm(s) => {
                let f = s.decision(&self.transformed(x));
                match self.calibration {
                    Some(sig) => sig.prob(f),
                    None => f64::from(f > 0.0),
                }
            }
        };
        Ok(p.clamp(0.0, 1.0))
    }

    pub fn predict_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.rows().map(|r| self.predict(r)).collect()
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let m: ClassifierModel = serde_json::from_reader(r)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::parse(
                "classifier model",
                format!("format version {} (expected {MODEL_FORMAT_VERSION})", m.format_version),
            ));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PredLabel {
    Left,
    Right,
    Unknown,
}

impl PredLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PredLabel::Left => "Left",
            PredLabel::Right => "Right",
            PredLabel::Unknown => "Unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub user_id: String,
    pub p_right: f64,
    pub label: PredLabel,
}

pub fn apply_threshold(p_right: f64, tau: f64) -> PredLabel {
    let q = 1.0 - p_right;
    if p_right >= tau.max(q) {
        PredLabel::Right
    } else if q >= tau.max(p_right) {
        PredLabel::Left
    } else {
        PredLabel::Unknown
    }
}

pub fn write_predictions<W: Write>(w: W, preds: &[Prediction]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "p_right", "label"])?;
    for p in preds {
        wtr.write_record([p.user_id.as_str(), &format!("{:.6}", p.p_right), p.label.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io("<predictions>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::ColumnKind;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn blobs(n: usize, sep: f64, seed: u64) -> (FeatureMatrix, Vec<LeaningLabel>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let right = i % 2 == 0;
            let c = if right { sep } else { -sep };
            data.push(c + rng.random_range(-1.0..1.0));
            data.push(c + rng.random_range(-1.0..1.0));
            y.push(if right { LeaningLabel::Right } else { LeaningLabel::Left });
        }
        let x = FeatureMatrix::new(
            (0..n).map(|i| format!("u{i}")).collect(),
            vec!["a".into(), "b".into()],
            vec![ColumnKind::Continuous; 2],
            data,
        )
        .unwrap();
        (x, y)
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(apply_threshold(0.9, 0.7), PredLabel::Right);
        assert_eq!(apply_threshold(0.55, 0.7), PredLabel::Unknown);
        assert_eq!(apply_threshold(0.2, 0.7), PredLabel::Left);
        assert_eq!(apply_threshold(0.71, 0.7), PredLabel::Right);
        assert_eq!(apply_threshold(0.69, 0.7), PredLabel::Unknown);
    }

    #[test]
    fn every_family_separates_blobs() {
        let (x, y) = blobs(80, 3.0, 4);
        for fam in Family::ALL {
            let m = train(fam, &x, &y, &ClassifierConfig::default()).unwrap();
            let acc = x
                .rows()
                .zip(&y)
                .filter(|(r, &l)| (m.predict(r).unwrap() >= 0.5) == (l == LeaningLabel::Right))
                .count() as f64
                / y.len() as f64;
            assert!(acc >= 0.99, "{fam}: {acc}");
        }
    }

    #[test]
    fn width_mismatch() {
        let (x, y) = blobs(20, 3.0, 1);
        let m = train(Family::Nb, &x, &y, &ClassifierConfig::default()).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::WidthMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn svm_zero_decision_probability() {
        let (x, y) = blobs(40, 1.0, 2);
        let m = train(Family::SvmLin, &x, &y, &ClassifierConfig::default()).unwrap();
        let sig = m.calibration.unwrap();
        assert!((sig.prob(0.0) - 1.0 / (1.0 + sig.b.exp())).abs() < 1e-15);
    }

    #[test]
    fn model_json_round_trip() {
        let (x, y) = blobs(30, 2.0, 3);
        for fam in Family::ALL {
            let m = train(fam, &x, &y, &ClassifierConfig::default()).unwrap();
            let mut buf = Vec::new();
            m.write_json(&mut buf).unwrap();
            let back = ClassifierModel::read_json(buf.as_slice()).unwrap();
            for r in x.rows() {
                assert_eq!(back.predict(r).unwrap(), m.predict(r).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn coverage_antitone(p in 0.0..=1.0f64, t1 in 0.5..=1.0f64, t2 in 0.5..=1.0f64) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            if apply_threshold(p, lo) == PredLabel::Unknown {
                prop_assert_eq!(apply_threshold(p, hi), PredLabel::Unknown);
            }
            prop_assert_ne!(apply_threshold(p, 0.5), PredLabel::Unknown);
        }
    }
}
