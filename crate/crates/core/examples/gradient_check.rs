//! Compares tape gradients with central finite differences for each
//! primitive and both graph layers on a few random inputs.

use rand::Rng;
use slidegraph::gcn::{basic_gnn_layer, gcn_layer};
use slidegraph::slideio::seeded_rng;
use slidegraph::tensor::{check_gradients, Tensor};
use slidegraph::wsigraph::{knn_graph, normalize_adjacency, raw_adjacency};

fn main() -> slidegraph::Result<()> {
    let mut rng = seeded_rng(11);
    let mut r = |rows: usize, cols: usize| Tensor::randn(&[rows, cols], 1.0, &mut rng);
    let (a, b, row) = (r(4, 3), r(3, 5), r(1, 3));
    let labels = [2usize, 0, 4, 1];

    let points: Vec<(f64, f64)> = {
        let mut rng = seeded_rng(12);
        (0..6).map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect()
    };
    let edges = knn_graph(&points, 2)?;
    let norm = normalize_adjacency(&edges, 6, true)?;
    let raw = raw_adjacency(&edges, 6)?;
    let (h, w, ws, wn, bias) = (r(6, 3), r(3, 4), r(3, 4), r(3, 4), r(1, 4));

    let checks = [
        ("matmul", check_gradients(&[a.clone(), b.clone()], 1e-6, |t, v| t.matmul(v[0], v[1]))?),
        ("add_row", check_gradients(&[a.clone(), row.clone()], 1e-6, |t, v| t.add_row(v[0], v[1]))?),
        ("mul", check_gradients(&[a.clone(), a.map(|x| x * 0.5 + 1.0)], 1e-6, |t, v| t.mul(v[0], v[1]))?),
        ("relu", check_gradients(&[a.clone()], 1e-6, |t, v| Ok(t.relu(v[0])))?),
        ("l2_normalize_rows", check_gradients(&[a.clone()], 1e-6, |t, v| t.l2_normalize_rows(v[0]))?),
        ("mean over rows", check_gradients(&[a.clone()], 1e-6, |t, v| t.mean(v[0], Some(0)))?),
        (
            "softmax cross-entropy",
            check_gradients(&[r(4, 5)], 1e-6, |t, v| t.softmax_cross_entropy(v[0], &labels))?,
        ),
        (
            "gcn layer",
            check_gradients(&[h.clone(), w], 1e-6, |t, v| gcn_layer(t, v[0], &norm, v[1]))?,
        ),
        (
            "basic layer",
            check_gradients(&[h, ws, wn, bias], 1e-6, |t, v| basic_gnn_layer(t, v[0], &raw, v[1], v[2], v[3]))?,
        ),
    ];
    for (name, c) in checks {
        println!("{name:<24} max relative error {:.2e}", c.max_rel_error);
    }
    Ok(())
}
