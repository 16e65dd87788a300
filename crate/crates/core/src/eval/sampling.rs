use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::LeaningLabel;
use crate::error::{Error, Result};

fn class_indices(labels: &[LeaningLabel]) -> (Vec<usize>, Vec<usize>) {
    let left = (0..labels.len()).filter(|&i| labels[i] == LeaningLabel::Left).collect();
    let right = (0..labels.len()).filter(|&i| labels[i] == LeaningLabel::Right).collect();
    (left, right)
}

/// All users of the smaller class plus as many randomly drawn users of the
/// larger one, in a seeded shuffled order. Returns indices into `labels`.
pub fn balanced_sample(labels: &[LeaningLabel], seed: u64) -> Result<Vec<usize>> {
    let (mut left, mut right) = class_indices(labels);
    if left.is_empty() || right.is_empty() {
        return Err(Error::EmptyClass(format!("balanced sample: {} left, {} right", left.len(), right.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = left.len().min(right.len());
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);
    let mut out: Vec<usize> = left[..n].iter().chain(&right[..n]).copied().collect();
    out.shuffle(&mut rng);
    Ok(out)
}

/// Stratified train/test split of indices `0..labels.len()`. Per-class
/// train counts use largest remainders so the total matches
/// round(ratio · n).
pub fn split(labels: &[LeaningLabel], ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.len() < 5 {
        return Err(Error::InvalidInput(format!("split needs at least 5 users, got {}", labels.len())));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidInput(format!("split ratio {ratio} outside [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut left, mut right) = class_indices(labels);
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);
    let target = (ratio * labels.len() as f64).round() as usize;
    let exact = [ratio * left.len() as f64, ratio * right.len() as f64];
    let mut take = [exact[0].floor() as usize, exact[1].floor() as usize];
    let mut rem = target.saturating_sub(take[0] + take[1]);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    for &c in order.iter().cycle().take(4) {
        let cap = if c == 0 { left.len() } else { right.len() };
        if rem > 0 && take[c] < cap {
            take[c] += 1;
            rem -= 1;
        }
    }
    let mut train: Vec<usize> = left[..take[0]].iter().chain(&right[..take[1]]).copied().collect();
    let mut test: Vec<usize> = left[take[0]..].iter().chain(&right[take[1]..]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Fold number for each index; classes are dealt round-robin so folds are
/// stratified and their sizes differ by at most one.
pub fn stratified_folds(labels: &[LeaningLabel], k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1, "k must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut left, mut right) = class_indices(labels);
    let mut other: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == LeaningLabel::Dropped).collect();
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);
    other.shuffle(&mut rng);
    let mut folds = vec![0; labels.len()];
    for (pos, &i) in left.iter().chain(&right).chain(&other).enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// Index lists of each fold.
pub fn kfold(labels: &[LeaningLabel], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if labels.len() < k {
        return Err(Error::InvalidInput(format!("{} users for {k} folds", labels.len())));
    }
    let assign = stratified_folds(labels, k, seed);
    let mut folds = vec![Vec::new(); k];
    for (i, f) in assign.into_iter().enumerate() {
        folds[f].push(i);
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use LeaningLabel::{Left, Right};

    fn labels(l: usize, r: usize) -> Vec<LeaningLabel> {
        let mut v = vec![Left; l];
        v.extend(vec![Right; r]);
        v
    }

    #[test]
    fn reference_sample_size() {
        let s = balanced_sample(&labels(1396, 364), 1).unwrap();
        assert_eq!(s.len(), 728);
        assert_eq!(s.iter().filter(|&&i| i >= 1396).count(), 364);
        assert_eq!(s, balanced_sample(&labels(1396, 364), 1).unwrap());
        assert_eq!(balanced_sample(&labels(50, 50), 2).unwrap().len(), 100);
        assert!(balanced_sample(&labels(5, 0), 2).is_err());
    }

    #[test]
    fn split_sizes() {
        let y = labels(50, 50);
        let (tr, te) = split(&y, 0.8, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn ten_folds_of_ten() {
        let folds = kfold(&labels(50, 50), 10, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 10));
    }

    proptest! {
        #[test]
        fn split_stratified(l in 3usize..60, r in 3usize..60, seed in 0u64..100) {
            let y = labels(l, r);
            let (tr, te) = split(&y, 0.8, seed).unwrap();
            prop_assert_eq!(tr.len() + te.len(), l + r);
            prop_assert!(tr.iter().all(|i| !te.contains(i)));
            let tr_r = tr.iter().filter(|&&i| y[i] == Right).count() as f64;
            prop_assert!((tr_r - 0.8 * r as f64).abs() <= 1.0);
            let te_r = te.iter().filter(|&&i| y[i] == Right).count() as f64;
            prop_assert!((te_r - 0.2 * r as f64).abs() <= 1.0);
        }

        #[test]
        fn folds_partition(l in 0usize..40, r in 0usize..40, k in 1usize..11, seed in 0u64..50) {
            prop_assume!(l + r >= k);
            let folds = kfold(&labels(l, r), k, seed).unwrap();
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = folds.concat();
            all.sort();
            prop_assert_eq!(all, (0..l + r).collect::<Vec<_>>());
        }
    }
}
