use super::cooc::Square;
use crate::error::{Error, Result};

/// Greedy farthest-point anchor selection with Gram–Schmidt deflation over
/// the rows of `qrow` whose index is in `candidates`.
pub fn find_anchors(qrow: &Square, k: usize, candidates: &[usize]) -> Result<Vec<usize>> {
    let v = qrow.n;
    if k == 0 || k > v {
        return Err(Error::InvalidInput(format!("K={k} with {v} words")));
    }
    if candidates.len() < k {
        return Err(Error::RankDeficient {
            found: candidates.len(),
            requested: k,
        });
    }
    let mut rows: Vec<Vec<f64>> = candidates.iter().map(|&i| qrow.row(i).to_vec()).collect();
    let scale: f64 = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; rows.len()];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (c, r) in rows.iter().enumerate() {
            if taken[c] {
                continue;
            }
            let norm: f64 = r.iter().map(|x| x * x).sum();
            if best.is_none_or(|(_, b)| norm > b) {
                best = Some((c, norm));
            }
        }
        let (c, norm) = best.expect("candidates remain");
        if norm <= tol {
            return Err(Error::RankDeficient {
                found: chosen.len(),
                requested: k,
            });
        }
        taken[c] = true;
        chosen.push(candidates[c]);
        let basis: Vec<f64> = rows[c].iter().map(|x| x / norm.sqrt()).collect();
        for (o, r) in rows.iter_mut().enumerate() {
            if taken[o] {
                continue;
            }
            let proj: f64 = r.iter().zip(&basis).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(&basis).for_each(|(a, b)| *a -= proj * b);
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(rows: &[&[f64]]) -> Square {
        Square {
            n: rows.len(),
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[test]
    fn orthogonal_rows() {
        let q = sq(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.8]]);
        let mut a = find_anchors(&q, 2, &[0, 1, 2]).unwrap();
        a.sort();
        assert_eq!(a, vec![0, 2]);
    }

    #[test]
    fn duplicates_not_both_chosen() {
        let q = sq(&[&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0], &[0.0, 0.2, 0.8]]);
        let a = find_anchors(&q, 2, &[0, 1, 2]).unwrap();
        assert!(!(a.contains(&0) && a.contains(&1)));
        assert!(matches!(find_anchors(&q, 3, &[0, 1, 2]), Err(Error::RankDeficient { found: 2, requested: 3 })));
    }
}
