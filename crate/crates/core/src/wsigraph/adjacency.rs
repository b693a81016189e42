use crate::error::{contract, Result};

/// Sparse symmetric adjacency as `(target, source, weight)` entries, sorted
/// by `(target, source)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub self_loops: bool,
}

/// Degree-normalised adjacency, `w(u, v) = 1/√(deg u · deg v)`.
pub type NormalizedAdjacency = Adjacency;

fn validate(edges: &[(usize, usize)], n: usize) -> Result<()> {
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(contract(format!("edge ({u}, {v}) out of range for {n} nodes")));
        }
        if u == v {
            return Err(contract(format!("self edge ({u}, {u}) in edge list")));
        }
    }
    Ok(())
}

fn degrees(edges: &[(usize, usize)], n: usize, self_loops: bool) -> Vec<usize> {
    let mut deg = vec![usize::from(self_loops); n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

fn build(edges: &[(usize, usize)], n: usize, self_loops: bool, weight: impl Fn(usize, usize) -> f64) -> Adjacency {
    let mut entries = Vec::with_capacity(2 * edges.len() + if self_loops { n } else { 0 });
    for &(u, v) in edges {
        entries.push((u, v, weight(u, v)));
        entries.push((v, u, weight(v, u)));
    }
    if self_loops {
        entries.extend((0..n).map(|u| (u, u, weight(u, u))));
    }
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Adjacency { n, entries, self_loops }
}

/// Symmetric normalisation of an undirected edge list (`u ≠ v`, no
/// duplicates). With `self_loops` every node also links to itself and
/// counts that link in its degree. Without them an isolated node has no
/// entries and so receives no message.
pub fn normalize_adjacency(edges: &[(usize, usize)], n: usize, self_loops: bool) -> Result<NormalizedAdjacency> {
    validate(edges, n)?;
    let deg = degrees(edges, n, self_loops);
    Ok(build(edges, n, self_loops, |u, v| 1.0 / ((deg[u] * deg[v]) as f64).sqrt()))
}

/// Unweighted adjacency (`w = 1` per edge, no self-loops).
pub fn raw_adjacency(edges: &[(usize, usize)], n: usize) -> Result<Adjacency> {
    validate(edges, n)?;
    Ok(build(edges, n, false, |_, _| 1.0))
}

impl Adjacency {
    pub fn targets(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn sources(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.2).collect()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(u, v)))
            .ok()
            .map(|i| self.entries[i].2)
    }

    /// Number of entries with target `u`, i.e. the degree used for
    /// normalisation.
    pub fn degree(&self, u: usize) -> usize {
        self.entries.iter().filter(|e| e.0 == u).count()
    }

    /// `out[u] = Σ_v w(u, v) · x[v]` for row-major `x` with `cols` columns.
    pub fn propagate(&self, x: &[f64], cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n * cols];
        for &(u, v, w) in &self.entries {
            let src = &x[v * cols..(v + 1) * cols];
            for (o, s) in out[u * cols..(u + 1) * cols].iter_mut().zip(src) {
                *o += w * s;
            }
        }
        out
    }
}
