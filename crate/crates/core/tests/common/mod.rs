//! Independent oracles and generators shared by the integration tests and
//! the acceptance harness. None of these call the code they check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use slidegraph::slideio::{Patch, RasterImage};
use slidegraph::ssl::Tap;
use slidegraph::tensor::Tensor;
use slidegraph::wsigraph::WsiGraph;

pub fn random_points<R: Rng>(rng: &mut R, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))).collect()
}

/// Exhaustive k-NN: full distance sort per node with index tie-break,
/// symmetrised by union, returned as `(min, max)` pairs.
pub fn knn_oracle(points: &[(f64, f64)], k: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &(xj, yj))| ((xi - xj).powi(2) + (yi - yj).powi(2), j))
            .collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in others.iter().take(k) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges
}

/// Direct-formula quadratic weighted kappa, written from the definition
/// without a confusion-matrix type: `1 − N·Σ w O / Σ w (a_i p_j)`.
pub fn kappa_oracle(actual: &[usize], predicted: &[usize], n: usize) -> f64 {
    let total = actual.len() as f64;
    let mut hist_a = vec![0.0; n];
    let mut hist_p = vec![0.0; n];
    let mut disagreement = 0.0;
    for (&a, &p) in actual.iter().zip(predicted) {
        hist_a[a] += 1.0;
        hist_p[p] += 1.0;
        disagreement += ((a as f64 - p as f64) / (n as f64 - 1.0)).powi(2);
    }
    let mut chance = 0.0;
    for i in 0..n {
        for j in 0..n {
            chance += ((i as f64 - j as f64) / (n as f64 - 1.0)).powi(2) * hist_a[i] * hist_p[j];
        }
    }
    if chance == 0.0 {
        return 1.0;
    }
    1.0 - total * disagreement / chance
}

pub fn random_tensor<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::matrix(rows, cols, data).unwrap()
}

/// A graph with random centroids (k-NN edges) and features.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, dim: usize, k: usize, label: usize) -> WsiGraph {
    let points = random_points(rng, n);
    WsiGraph::from_parts(random_tensor(rng, n, dim), points, k, label, "random", Tap::Small).unwrap()
}

/// Two disjoint copies of `g`: node `u` and node `u + n` share features
/// and each copy keeps the original edges.
pub fn doubled(g: &WsiGraph) -> WsiGraph {
    let n = g.node_count();
    let d = g.feature_dim();
    let mut data = g.features.data().to_vec();
    data.extend_from_slice(g.features.data());
    let mut centroids = g.centroids.clone();
    centroids.extend(g.centroids.iter().map(|&(x, y)| (x + 1e4, y)));
    let mut edges = g.edges.clone();
    edges.extend(g.edges.iter().map(|&(u, v)| (u + n, v + n)));
    WsiGraph {
        centroids,
        features: Tensor::matrix(2 * n, d, data).unwrap(),
        edges,
        ..g.clone()
    }
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Literal per-node loop of the basic layer:
/// `out[u] = relu(h_u W_self + Σ_{v ∈ N(u)} h_v W_neigh + b)`.
pub fn basic_layer_oracle(
    h: &Tensor,
    edges: &[(usize, usize)],
    w_self: &Tensor,
    w_neigh: &Tensor,
    b: &Tensor,
) -> Vec<f64> {
    let n = h.rows();
    let (din, dout) = (w_self.rows(), w_self.cols());
    let mut out = vec![0.0; n * dout];
    for u in 0..n {
        let neighbours: Vec<usize> = edges
            .iter()
            .filter_map(|&(a, c)| if a == u { Some(c) } else if c == u { Some(a) } else { None })
            .collect();
        for o in 0..dout {
            let mut acc = b.get(0, o);
            for i in 0..din {
                acc += h.get(u, i) * w_self.get(i, o);
                for &v in &neighbours {
                    acc += h.get(v, i) * w_neigh.get(i, o);
                }
            }
            out[u * dout + o] = acc.max(0.0);
        }
    }
    out
}

/// A `size`×`size` patch with random pixels at grid `(row, col)`.
pub fn random_patch<R: Rng>(rng: &mut R, size: usize, row: usize, col: usize) -> Patch {
    let samples = (0..size * size * 3).map(|_| rng.random::<u8>()).collect();
    Patch {
        pixels: RasterImage::new(size, size, samples).unwrap(),
        grid_row: row,
        grid_col: col,
        centroid: Patch::centroid_of(row, col, size),
        tissue_fraction: 1.0,
    }
}

/// Mean blue ratio recomputed from raw samples.
pub fn mean_br_oracle(image: &RasterImage) -> f64 {
    let s = image.samples();
    let sum: f64 = s
        .chunks(3)
        .map(|p| {
            let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
            100.0 * b * 256.0 / ((1.0 + r + g) * (1.0 + r + g + b))
        })
        .sum();
    sum / (s.len() / 3) as f64
}

/// Tile order by sorting on `(−Br, row, col)` keys.
pub fn select_tiles_oracle(patches: &[Patch], bag: usize) -> Vec<(usize, usize)> {
    let mut keyed: Vec<(f64, usize, usize)> =
        patches.iter().map(|p| (-mean_br_oracle(&p.pixels), p.grid_row, p.grid_col)).collect();
    keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    keyed.into_iter().take(bag).map(|(_, r, c)| (r, c)).collect()
}
