//! Anchor-word topic model: co-occurrence, anchor selection, RecoverL2,
//! EM folding-in for document proportions, word rankings and prevalence
//! regression.

mod anchors;
mod cooc;
mod prevalence;
mod recover;
mod scores;
mod theta;

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use anchors::find_anchors;
pub use cooc::{cooccurrence, Square};
pub use prevalence::{prevalence_regression, PrevalenceEffect};
pub use recover::{recover_beta, simplex_least_squares, RecoverParams, Recovery, WordFit};
pub use scores::{top_indices, top_words, word_scores, ScoreKind, WordScores};
pub use theta::{infer_theta, EmParams, ThetaFit};

use crate::error::{Error, Result};
use crate::textprep::{ColumnKind, FeatureMatrix, SparseDfm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicConfig {
    pub k: usize,
    /// Words in fewer documents than this cannot be anchors.
    pub anchor_min_df: usize,
    pub recover_tol: f64,
    pub recover_max_iter: usize,
    pub em_max_iter: usize,
    pub em_rel_tol: f64,
    pub frex_weight: f64,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            k: 150,
            anchor_min_df: 5,
            recover_tol: 1e-7,
            recover_max_iter: 500,
            em_max_iter: 200,
            em_rel_tol: 1e-8,
            frex_weight: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub vocab: Vec<String>,
    /// Column index in `vocab` of each topic's anchor word.
    pub anchors: Vec<usize>,
    /// K × V, rows sum to one.
    #[serde(skip)]
    pub beta: Vec<Vec<f64>>,
    pub em_max_iter: usize,
    pub em_rel_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub documents_used: usize,
    pub vocab_size: usize,
    pub anchor_words: Vec<String>,
    pub nonconverged_words: usize,
    pub max_residual: f64,
}

pub fn fit_topic_model(dfm: &SparseDfm, cfg: &TopicConfig) -> Result<(TopicModel, FitReport)> {
    let q = cooccurrence(dfm)?;
    let qrow = q.row_normalized();
    let df = dfm.doc_frequencies();
    let row_sums = q.row_sums();
    let candidates: Vec<usize> = (0..dfm.n_cols())
        .filter(|&w| df[w] >= cfg.anchor_min_df && row_sums[w] > 0.0)
        .collect();
    let anchors = find_anchors(&qrow, cfg.k, &candidates)?;
    let params = RecoverParams {
        tol: cfg.recover_tol,
        max_iter: cfg.recover_max_iter,
    };
    let rec = recover_beta(&q, &qrow, &anchors, &params);
    let vocab = dfm.col_ids().to_vec();
    let report = FitReport {
        documents_used: (0..dfm.n_rows()).filter(|&d| dfm.row_sum(d) >= 2.0).count(),
        vocab_size: vocab.len(),
        anchor_words: anchors.iter().map(|&a| vocab[a].clone()).collect(),
        nonconverged_words: rec.fits.iter().filter(|f| !f.converged).count(),
        max_residual: rec.fits.iter().map(|f| f.residual).fold(0.0, f64::max),
    };
    let model = TopicModel {
        k: cfg.k,
        vocab,
        anchors,
        beta: rec.beta,
        em_max_iter: cfg.em_max_iter,
        em_rel_tol: cfg.em_rel_tol,
    };
    Ok((model, report))
}

/// Document-topic proportions, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    pub row_ids: Vec<String>,
    pub theta: Vec<Vec<f64>>,
}

impl TopicModel {
    pub fn em_params(&self) -> EmParams {
        EmParams {
            max_iter: self.em_max_iter,
            rel_tol: self.em_rel_tol,
        }
    }

    /// Folds every row of `dfm` into the model. Columns are matched by name;
    /// features unknown to the model are ignored.
    pub fn infer(&self, dfm: &SparseDfm) -> ThetaMatrix {
        let pos: HashMap<&str, usize> = self.vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let map: Vec<Option<usize>> = dfm.col_ids().iter().map(|c| pos.get(c.as_str()).copied()).collect();
        let params = self.em_params();
        let mut oov = 0usize;
        let theta = (0..dfm.n_rows())
            .map(|d| {
                let (idx, vals) = dfm.row(d);
                let counts: Vec<(usize, f64)> = idx
                    .iter()
                    .zip(vals)
                    .filter_map(|(&j, &v)| map[j].map(|m| (m, v)))
                    .collect();
                let fit = infer_theta(&counts, &self.beta, &params);
                if fit.out_of_vocabulary {
                    oov += 1;
                    log::warn!("document {} has no in-vocabulary mass; using uniform theta", dfm.row_ids()[d]);
                }
                fit.theta
            })
            .collect();
        if oov > 0 {
            log::warn!("{oov} documents fell back to uniform theta");
        }
        ThetaMatrix {
            row_ids: dfm.row_ids().to_vec(),
            theta,
        }
    }

    pub fn scores(&self, frex_weight: f64) -> WordScores {
        word_scores(&self.beta, frex_weight)
    }

    /// Rows of (topic, rank, word, statistic) for every topic.
    pub fn top_words_report(&self, frex_weight: f64, n_each: usize, n_out: usize) -> Vec<(usize, usize, String, ScoreKind)> {
        let s = self.scores(frex_weight);
        let mut out = Vec::new();
        for t in 0..self.k {
            for (r, (w, kind)) in top_words(t, &s, &self.vocab, n_each, n_out).into_iter().enumerate() {
                out.push((t + 1, r + 1, w, kind));
            }
        }
        out
    }

    pub fn write_header<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// β as CSV: a `topic` column followed by one column per word.
    pub fn write_beta<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["topic".to_string()];
        header.extend(self.vocab.iter().cloned());
        wtr.write_record(&header)?;
        for (t, row) in self.beta.iter().enumerate() {
            let mut rec = vec![(t + 1).to_string()];
            rec.extend(row.iter().map(|x| format!("{x:e}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<beta>", e))?;
        Ok(())
    }

    pub fn read<R1: Read, R2: Read>(header: R1, beta: R2) -> Result<Self> {
        let mut model: TopicModel = serde_json::from_reader(header)?;
        let mut rdr = csv::Reader::from_reader(beta);
        let cols = rdr.headers()?.len();
        if cols != model.vocab.len() + 1 {
            return Err(Error::parse("beta csv", format!("{} columns for {} words", cols, model.vocab.len())));
        }
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>().map_err(|e| Error::parse("beta csv", e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            model.beta.push(row);
        }
        if model.beta.len() != model.k {
            return Err(Error::parse("beta csv", format!("{} rows for K={}", model.beta.len(), model.k)));
        }
        Ok(model)
    }
}

impl ThetaMatrix {
    pub fn k(&self) -> usize {
        self.theta.first().map_or(0, Vec::len)
    }

    pub fn to_features(&self) -> Result<FeatureMatrix> {
        let k = self.k();
        FeatureMatrix::new(
            self.row_ids.clone(),
            (1..=k).map(|t| format!("topic_{t}")).collect(),
            vec![ColumnKind::Continuous; k],
            self.theta.iter().flatten().copied().collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["user_id".to_string()];
        header.extend((1..=self.k()).map(|t| format!("theta_{t}")));
        wtr.write_record(&header)?;
        for (id, row) in self.row_ids.iter().zip(&self.theta) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|x| format!("{x:e}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<theta>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut row_ids = Vec::new();
        let mut theta = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            row_ids.push(rec.get(0).unwrap_or_default().to_string());
            theta.push(
                rec.iter()
                    .skip(1)
                    .map(|s| s.parse::<f64>().map_err(|e| Error::parse("theta csv", e.to_string())))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
        Ok(ThetaMatrix { row_ids, theta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{DfmBuilder, DfmKind};

    fn docs(rows: &[&str]) -> SparseDfm {
        let mut b = DfmBuilder::new();
        for (i, r) in rows.iter().enumerate() {
            b.push_document(format!("d{i}"), r.split_whitespace());
        }
        b.finish(DfmKind::Text).unwrap()
    }

    #[test]
    fn k1_beta_is_word_distribution() {
        let dfm = docs(&["a b b c", "a c c c d", "b d"]);
        let cfg = TopicConfig { k: 1, anchor_min_df: 1, ..Default::default() };
        let (m, _) = fit_topic_model(&dfm, &cfg).unwrap();
        let q = cooccurrence(&dfm).unwrap();
        for (b, p) in m.beta[0].iter().zip(q.row_sums()) {
            assert!((b - p).abs() < 1e-12);
        }
        let th = m.infer(&dfm);
        assert!(th.theta.iter().all(|r| r == &vec![1.0]));
    }

    #[test]
    fn serialization_round_trip() {
        let dfm = docs(&["a b b c", "a c c c d", "b d a", "d d c b"]);
        let cfg = TopicConfig { k: 2, anchor_min_df: 1, ..Default::default() };
        let (m, _) = fit_topic_model(&dfm, &cfg).unwrap();
        let (mut h, mut b) = (Vec::new(), Vec::new());
        m.write_header(&mut h).unwrap();
        m.write_beta(&mut b).unwrap();
        let back = TopicModel::read(h.as_slice(), b.as_slice()).unwrap();
        assert_eq!(back, m);

        let th = m.infer(&dfm);
        let mut buf = Vec::new();
        th.write_csv(&mut buf).unwrap();
        assert_eq!(ThetaMatrix::read_csv(buf.as_slice()).unwrap(), th);
    }
}
