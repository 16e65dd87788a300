//! Sampling, splitting, metrics, threshold tables and the evaluation
//! report.

mod metrics;
mod sampling;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use metrics::{
    activity_index, f1_score, follow_shares, pearson, permutation_importance, prf, prf_at,
    select_and_apply, select_threshold, threshold_grid, threshold_table, Importance, Prf,
    ThresholdRow, ThresholdTarget, DEFAULT_TARGETS,
};
pub use sampling::{balanced_sample, kfold, split, stratified_folds};

use crate::classify::Family;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dataset {
    #[serde(rename = "net")]
    Net,
    #[serde(rename = "non-pol")]
    NonPol,
    #[serde(rename = "non-pol+net")]
    NonPolNet,
    #[serde(rename = "pol")]
    Pol,
    #[serde(rename = "pol+net")]
    PolNet,
}

impl Dataset {
    pub const ALL: [Dataset; 5] = [Dataset::Net, Dataset::NonPol, Dataset::NonPolNet, Dataset::Pol, Dataset::PolNet];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Net => "net",
            Dataset::NonPol => "non-pol",
            Dataset::NonPolNet => "non-pol+net",
            Dataset::Pol => "pol",
            Dataset::PolNet => "pol+net",
        }
    }

    pub fn uses_network(self) -> bool {
        matches!(self, Dataset::Net | Dataset::NonPolNet | Dataset::PolNet)
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown dataset {s:?}; expected net, non-pol, non-pol+net, pol or pol+net"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub dataset: Dataset,
    pub classifier: Family,
    /// Sample number, or `None` for the mean over samples.
    pub sample: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub unknown_fraction: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub dataset: Dataset,
    pub classifier: Family,
    /// Mean F1 over all folds of all samples.
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReportRow {
    pub dataset: Dataset,
    pub classifier: Family,
    pub target: String,
    pub tau: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub unknown_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub quantity: String,
    pub r: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowShareRow {
    pub account: String,
    pub importance: f64,
    pub left_pct: f64,
    pub right_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seeds: Vec<u64>,
    pub cross_validation: Vec<CvRow>,
    pub test: Vec<MetricRow>,
    pub thresholds: Vec<ThresholdReportRow>,
    pub correlations: Vec<CorrelationRow>,
    pub follow_shares: Vec<FollowShareRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "unreachable".to_string(), |x| format!("{x:.4}"))
}

impl EvalReport {
    pub fn mean_test(&self, dataset: Dataset, classifier: Family) -> Option<&MetricRow> {
        self.test
            .iter()
            .find(|r| r.dataset == dataset && r.classifier == classifier && r.sample.is_none())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Wide layout: one row per dataset, one column per classifier.
    pub fn write_cv_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["dataset".to_string()];
        header.extend(Family::ALL.iter().map(|f| f.to_string()));
        wtr.write_record(&header)?;
        for d in Dataset::ALL {
            if !self.cross_validation.iter().any(|r| r.dataset == d) {
                continue;
            }
            let mut rec = vec![d.to_string()];
            for f in Family::ALL {
                let v = self.cross_validation.iter().find(|r| r.dataset == d && r.classifier == f);
                rec.push(v.map_or_else(String::new, |r| format!("{:.4}", r.f1)));
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    /// Test metrics in long form; the `sample` column is `mean` for averages.
    pub fn write_test_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["dataset", "classifier", "sample", "f1", "precision", "recall", "unknown", "n"])?;
        for r in &self.test {
            wtr.write_record([
                r.dataset.to_string(),
                r.classifier.to_string(),
                r.sample.map_or_else(|| "mean".to_string(), |s| s.to_string()),
                format!("{:.4}", r.f1),
                format!("{:.4}", r.precision),
                format!("{:.4}", r.recall),
                format!("{:.4}", r.unknown_fraction),
                r.n.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_threshold_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["dataset", "classifier", "target", "threshold", "f1", "precision", "recall", "unknown"])?;
        for r in &self.thresholds {
            wtr.write_record([
                r.dataset.to_string(),
                r.classifier.to_string(),
                r.target.clone(),
                r.tau.map_or_else(|| "unreachable".to_string(), |t| format!("{t:.2}")),
                fmt_opt(r.f1),
                fmt_opt(r.precision),
                fmt_opt(r.recall),
                fmt_opt(r.unknown_fraction),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_correlation_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["quantity", "r", "n"])?;
        for r in &self.correlations {
            wtr.write_record([r.quantity.clone(), format!("{:.4}", r.r), r.n.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_follow_share_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["account", "importance", "left_pct", "right_pct"])?;
        for r in &self.follow_shares {
            wtr.write_record([
                r.account.clone(),
                format!("{:.4}", r.importance),
                format!("{:.1}", r.left_pct),
                format!("{:.1}", r.right_pct),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }
}
