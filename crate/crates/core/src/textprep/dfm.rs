use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfmKind {
    Text,
    Network,
    Hybrid,
}

/// Sparse document-feature matrix in compressed-row form.
///
/// Column indices within a row are strictly increasing and every stored
/// value is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDfm {
    pub kind: DfmKind,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    sparsity: Option<f64>,
}

/// Metadata written next to the triplet CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfmHeader {
    pub kind: DfmKind,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub sparsity: Option<f64>,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
}

impl SparseDfm {
    /// Builds from per-row `(column, value)` lists. Zero values are dropped
    /// and duplicate columns within a row are summed.
    pub fn from_rows(
        kind: DfmKind,
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        if rows.len() != row_ids.len() {
            return Err(Error::InvalidInput(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                rows.len()
            )));
        }
        let mut seen = HashSet::with_capacity(row_ids.len());
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate row id {id}")));
            }
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= col_ids.len() {
                    return Err(Error::InvalidInput(format!("column {c} out of range")));
                }
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!("bad value {v} in column {c}")));
                }
                if last == Some(c) {
                    *values.last_mut().expect("previous entry") += v;
                    continue;
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        if kind == DfmKind::Network && values.iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidInput("network matrix must be binary".into()));
        }
        Ok(Self {
            kind,
            row_ids,
            col_ids,
            indptr,
            indices,
            values,
            sparsity: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn sparsity(&self) -> Option<f64> {
        self.sparsity
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// Dense copy of row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        let (idx, val) = self.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            out[c] = v;
        }
        out
    }

    /// Number of rows with a nonzero entry in each column.
    pub fn doc_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0; self.n_cols()];
        for &c in &self.indices {
            df[c] += 1;
        }
        df
    }

    /// Column totals.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_cols()];
        for (&c, &v) in self.indices.iter().zip(&self.values) {
            s[c] += v;
        }
        s
    }

    /// Keeps only the listed rows, in the given order. Unknown ids are an
    /// error.
    pub fn select_rows(&self, ids: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("unknown row {id}")))?;
            let (idx, val) = self.row(i);
            rows.push(idx.iter().copied().zip(val.iter().copied()).collect());
        }
        let mut out = Self::from_rows(self.kind, ids.to_vec(), self.col_ids.clone(), rows)?;
        out.sparsity = self.sparsity;
        Ok(out)
    }

    /// Keeps only the listed columns (by index, in the given order).
    pub fn select_cols(&self, keep: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.n_cols()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let mut indptr = Vec::with_capacity(self.n_rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            let mut row: Vec<(usize, f64)> = idx
                .iter()
                .zip(val)
                .filter(|(&c, _)| remap[c] != usize::MAX)
                .map(|(&c, &v)| (remap[c], v))
                .collect();
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            kind: self.kind,
            row_ids: self.row_ids.clone(),
            col_ids: keep.iter().map(|&c| self.col_ids[c].clone()).collect(),
            indptr,
            indices,
            values,
            sparsity: self.sparsity,
        }
    }

    pub fn header(&self) -> DfmHeader {
        DfmHeader {
            kind: self.kind,
            n_rows: self.n_rows(),
            n_cols: self.n_cols(),
            nnz: self.nnz(),
            sparsity: self.sparsity,
            row_ids: self.row_ids.clone(),
            col_ids: self.col_ids.clone(),
        }
    }

    /// Writes `row_id,col_id,value` triplets in row-major order.
    pub fn write_triplets<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["row_id", "col_id", "value"])?;
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (&c, &v) in idx.iter().zip(val) {
                wtr.write_record([self.row_ids[i].as_str(), self.col_ids[c].as_str(), &v.to_string()])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<dfm triplets>", e))?;
        Ok(())
    }

    /// Rebuilds a matrix from its header and triplet CSV.
    pub fn read_triplets<R: Read>(header: &DfmHeader, r: R) -> Result<Self> {
        let rows_ix: HashMap<&str, usize> = header
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let cols_ix: HashMap<&str, usize> = header
            .col_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut rows = vec![Vec::new(); header.row_ids.len()];
        let mut rdr = csv::Reader::from_reader(r);
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let ctx = || format!("dfm triplet line {}", line + 2);
            if rec.len() != 3 {
                return Err(Error::parse(ctx(), "expected 3 fields"));
            }
            let i = *rows_ix.get(&rec[0]).ok_or_else(|| Error::parse(ctx(), "unknown row"))?;
            let c = *cols_ix.get(&rec[1]).ok_or_else(|| Error::parse(ctx(), "unknown column"))?;
            let v: f64 = rec[2].parse().map_err(|e| Error::parse(ctx(), e))?;
            rows[i].push((c, v));
        }
        let mut out = Self::from_rows(header.kind, header.row_ids.clone(), header.col_ids.clone(), rows)?;
        out.sparsity = header.sparsity;
        Ok(out)
    }
}

/// Incremental DFM construction with feature interning.
#[derive(Debug, Default)]
pub struct DfmBuilder {
    vocab: HashMap<String, usize>,
    row_ids: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl DfmBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_document<I, S>(&mut self, id: impl Into<String>, features: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for f in features {
            let f = f.as_ref();
            let next = self.vocab.len();
            let c = match self.vocab.get(f) {
                Some(&c) => c,
                None => {
                    self.vocab.insert(f.to_owned(), next);
                    next
                }
            };
            *counts.entry(c).or_insert(0.0) += 1.0;
        }
        self.row_ids.push(id.into());
        self.rows.push(counts.into_iter().collect());
    }

    /// Finishes with columns in lexicographic order.
    pub fn finish(self, kind: DfmKind) -> Result<SparseDfm> {
        let mut names: Vec<(String, usize)> = self.vocab.into_iter().collect();
        names.sort();
        let mut remap = vec![0; names.len()];
        for (new, (_, old)) in names.iter().enumerate() {
            remap[*old] = new;
        }
        let rows = self
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|(c, v)| (remap[c], v)).collect())
            .collect();
        let col_ids = names.into_iter().map(|(n, _)| n).collect();
        SparseDfm::from_rows(kind, self.row_ids, col_ids, rows)
    }
}

/// Counts matrix of user documents; rows follow the map's key order and
/// columns are lexicographic.
pub fn build_dfm<S: AsRef<str>>(docs: &BTreeMap<String, Vec<S>>) -> Result<SparseDfm> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("no documents".into()));
    }
    let mut b = DfmBuilder::new();
    for (id, feats) in docs {
        b.push_document(id.clone(), feats.iter().map(|s| s.as_ref()));
    }
    b.finish(DfmKind::Text)
}

/// Drops every feature whose document-frequency proportion is at most
/// `1 - sparsity`.
pub fn trim_sparse(dfm: &SparseDfm, sparsity: f64) -> Result<SparseDfm> {
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::InvalidInput(format!("sparsity {sparsity} outside (0,1]")));
    }
    let n = dfm.n_rows();
    if n == 0 || dfm.n_cols() == 0 {
        return Err(Error::InvalidInput("empty document-feature matrix".into()));
    }
    let n = n as f64;
    // proportions within 1e-9 of the boundary count as equal to it
    let min_df = (1.0 - sparsity) * n + 1e-9 * n;
    let keep: Vec<usize> = dfm
        .doc_frequencies()
        .iter()
        .enumerate()
        .filter(|(_, &df)| df as f64 > min_df)
        .map(|(c, _)| c)
        .collect();
    if keep.is_empty() {
        return Err(Error::AllFeaturesDropped { sparsity });
    }
    let mut out = dfm.select_cols(&keep);
    out.sparsity = Some(sparsity);
    Ok(out)
}
