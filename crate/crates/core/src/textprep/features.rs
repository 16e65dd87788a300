use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dfm::SparseDfm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
}

/// Dense row-major feature matrix handed to the classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    row_ids: Vec<String>,
    col_names: Vec<String>,
    kinds: Vec<ColumnKind>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(
        row_ids: Vec<String>,
        col_names: Vec<String>,
        kinds: Vec<ColumnKind>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if col_names.len() != kinds.len() || data.len() != row_ids.len() * col_names.len() {
            return Err(Error::InvalidInput(format!(
                "feature matrix shape mismatch: {} rows, {} names, {} kinds, {} values",
                row_ids.len(),
                col_names.len(),
                kinds.len(),
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature value {v}")));
        }
        Ok(Self {
            row_ids,
            col_names,
            kinds,
            data,
        })
    }

    /// Binary columns from a network matrix.
    pub fn from_network(net: &SparseDfm) -> Self {
        let mut data = Vec::with_capacity(net.n_rows() * net.n_cols());
        for i in 0..net.n_rows() {
            data.extend(net.dense_row(i).into_iter().map(|v| if v > 0.0 { 1.0 } else { 0.0 }));
        }
        Self {
            row_ids: net.row_ids().to_vec(),
            col_names: net.col_ids().to_vec(),
            kinds: vec![ColumnKind::Binary; net.n_cols()],
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_cols();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let w = self.n_cols();
        self.data[i * w + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    /// Rows in the order of `ids`; unknown ids are an error.
    pub fn select_rows(&self, ids: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        let mut data = Vec::with_capacity(ids.len() * self.n_cols());
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("unknown row {id}")))?;
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            row_ids: ids.to_vec(),
            col_names: self.col_names.clone(),
            kinds: self.kinds.clone(),
            data,
        })
    }
}

/// Concatenates text features with network columns for users present in
/// both, keeping the text matrix's row order.
pub fn join_features(text: &FeatureMatrix, net: &SparseDfm) -> Result<FeatureMatrix> {
    let net_ix: HashMap<&str, usize> = net
        .row_ids()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect();
    let width = text.n_cols() + net.n_cols();
    let mut row_ids = Vec::new();
    let mut data = Vec::new();
    for (i, id) in text.row_ids().iter().enumerate() {
        if let Some(&j) = net_ix.get(id.as_str()) {
            row_ids.push(id.clone());
            data.extend_from_slice(text.row(i));
            data.extend(net.dense_row(j).into_iter().map(|v| if v > 0.0 { 1.0 } else { 0.0 }));
        }
    }
    if row_ids.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut col_names = text.col_names().to_vec();
    col_names.extend(net.col_ids().iter().cloned());
    let mut kinds = text.kinds().to_vec();
    kinds.extend(std::iter::repeat_n(ColumnKind::Binary, net.n_cols()));
    debug_assert_eq!(data.len(), row_ids.len() * width);
    FeatureMatrix::new(row_ids, col_names, kinds, data)
}
