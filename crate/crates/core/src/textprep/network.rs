use std::collections::{BTreeMap, BTreeSet};

use super::dfm::{trim_sparse, DfmKind, SparseDfm};
use crate::error::Result;

/// Binary user × account matrix over accounts followed by at least two of
/// the given users, then sparsity-trimmed.
///
/// Users with an empty friends list keep an all-zero row.
pub fn build_network_matrix(
    friends: &BTreeMap<String, BTreeSet<String>>,
    sparsity: f64,
) -> Result<SparseDfm> {
    let mut followers: BTreeMap<&str, usize> = BTreeMap::new();
    for accounts in friends.values() {
        for a in accounts {
            *followers.entry(a.as_str()).or_insert(0) += 1;
        }
    }
    let col_ids: Vec<String> = followers
        .iter()
        .filter(|(_, &n)| n >= 2)
        .map(|(a, _)| a.to_string())
        .collect();
    let col_ix: BTreeMap<&str, usize> = col_ids
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let row_ids: Vec<String> = friends.keys().cloned().collect();
    let rows = friends
        .values()
        .map(|accounts| {
            accounts
                .iter()
                .filter_map(|a| col_ix.get(a.as_str()).map(|&c| (c, 1.0)))
                .collect()
        })
        .collect();
    let full = SparseDfm::from_rows(DfmKind::Network, row_ids, col_ids, rows)?;
    trim_sparse(&full, sparsity)
}
