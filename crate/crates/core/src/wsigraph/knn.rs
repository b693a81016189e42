use std::collections::BTreeSet;

use crate::error::{contract, Result};

pub const DEFAULT_K: usize = 8;

/// Undirected k-nearest-neighbour edges over `points`, as sorted `(u, v)`
/// pairs with `u < v`.
///
/// Every node links to its `k` nearest others by Euclidean distance (exact
/// brute force, ties to the lower index); the directed lists are merged by
/// union. `k ≥ n` links each node to all others.
pub fn knn_graph(points: &[(f64, f64)], k: usize) -> Result<Vec<(usize, usize)>> {
    if k == 0 {
        return Err(contract("k must be at least 1"));
    }
    if points.is_empty() {
        return Err(contract("k-NN over an empty point set"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(contract("centroids must be finite"));
    }
    let n = points.len();
    let take = k.min(n - 1);
    let mut edges = BTreeSet::new();
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (i, &(xi, yi)) in points.iter().enumerate() {
        scratch.clear();
        scratch.extend(points.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, &(xj, yj))| {
            let (dx, dy) = (xi - xj, yi - yj);
            (dx * dx + dy * dy, j)
        }));
        if take < scratch.len() {
            scratch.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        for &(_, j) in &scratch[..take] {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    Ok(edges.into_iter().collect())
}
