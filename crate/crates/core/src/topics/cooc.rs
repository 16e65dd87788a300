use crate::error::{Error, Result};
use crate::textprep::SparseDfm;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Square {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Square { n, data: vec![0.0; n * n] }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Each row divided by its sum; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Square {
        let mut out = self.clone();
        for i in 0..self.n {
            let row = &mut out.data[i * self.n..(i + 1) * self.n];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        out
    }
}

/// Word co-occurrence probabilities averaged over documents:
/// mean_d (h hᵀ − diag h) / (n(n−1)). Documents with fewer than two tokens
/// are skipped.
pub fn cooccurrence(dfm: &SparseDfm) -> Result<Square> {
    let v = dfm.n_cols();
    let mut q = Square::zeros(v);
    let mut used = 0usize;
    let mut skipped = 0usize;
    for d in 0..dfm.n_rows() {
        let (idx, vals) = dfm.row(d);
        let n: f64 = vals.iter().sum();
        if n < 2.0 {
            skipped += 1;
            continue;
        }
        used += 1;
        let norm = 1.0 / (n * (n - 1.0));
        for (a, &i) in idx.iter().enumerate() {
            let hi = vals[a];
            let row = &mut q.data[i * v..(i + 1) * v];
            for (b, &j) in idx.iter().enumerate() {
                row[j] += hi * vals[b] * norm;
            }
            row[i] -= hi * norm;
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} documents with fewer than two tokens left out of the co-occurrence matrix");
    }
    if used == 0 {
        return Err(Error::NoQualifyingDocuments);
    }
    let scale = 1.0 / used as f64;
    q.data.iter_mut().for_each(|x| *x *= scale);
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::DfmKind;

    fn dfm(rows: &[&[(&str, f64)]]) -> SparseDfm {
        let mut b = crate::textprep::DfmBuilder::new();
        for (i, r) in rows.iter().enumerate() {
            let feats: Vec<&str> = r
                .iter()
                .flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize))
                .collect();
            b.push_document(format!("d{i}"), feats);
        }
        b.finish(DfmKind::Text).unwrap()
    }

    #[test]
    fn single_pair() {
        let q = cooccurrence(&dfm(&[&[("a", 1.0), ("b", 1.0)]])).unwrap();
        assert_eq!(q.data, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn repeated_word() {
        let q = cooccurrence(&dfm(&[&[("a", 2.0)]])).unwrap();
        assert_eq!(q.data, vec![1.0]);
    }

    #[test]
    fn no_qualifying_docs() {
        assert!(matches!(
            cooccurrence(&dfm(&[&[("a", 1.0)]])),
            Err(Error::NoQualifyingDocuments)
        ));
    }
}
