//! k-NN construction, adjacency normalisation and GCN invariances.

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use slidegraph::gcn::{basic_gnn_layer, gcn_layer, GcnConfig, GcnModel, LayerKind};
use slidegraph::slideio::{
    extract_patches, generate_synthetic_slide, seeded_rng, segment_tissue, SegmentParams, SyntheticSlideSpec,
};
use slidegraph::ssl::Tap;
use slidegraph::tensor::{Tape, Tensor};
use slidegraph::wsigraph::{knn_graph, normalize_adjacency, WsiGraph};

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn knn_matches_exhaustive_search(seed in any::<u64>(), n in 1usize..120, k in prop::sample::select(vec![1usize, 5, 8])) {
        let points = random_points(&mut seeded_rng(seed), n);
        let got: Vec<(usize, usize)> = knn_graph(&points, k).unwrap();
        let want: Vec<(usize, usize)> = knn_oracle(&points, k).into_iter().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn knn_on_a_lattice_with_ties(side in 2usize..8, k in 1usize..9) {
        // Integer lattices force many equal distances.
        let points: Vec<(f64, f64)> = (0..side * side).map(|i| ((i % side) as f64, (i / side) as f64)).collect();
        let want: Vec<(usize, usize)> = knn_oracle(&points, k).into_iter().collect();
        prop_assert_eq!(knn_graph(&points, k).unwrap(), want);
    }

    #[test]
    fn normalised_weights_are_symmetric(seed in any::<u64>(), n in 1usize..40, k in 1usize..6, self_loops: bool) {
        let points = random_points(&mut seeded_rng(seed), n);
        let edges = knn_graph(&points, k).unwrap();
        let adj = normalize_adjacency(&edges, n, self_loops).unwrap();
        for &(t, s, w) in &adj.entries {
            prop_assert_eq!(adj.weight(s, t), Some(w));
        }
    }

    #[test]
    fn gcn_layer_is_permutation_equivariant(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = seeded_rng(seed);
        let g = random_graph(&mut rng, n, 4, 3, 0);
        let perm = random_permutation(&mut rng, n);
        let p = g.permuted(&perm).unwrap();
        let w = random_tensor(&mut rng, 4, 3);
        let run = |graph: &WsiGraph| {
            let mut tape = Tape::new();
            let h = tape.constant(graph.features.clone());
            let wv = tape.constant(w.clone());
            let out = gcn_layer(&mut tape, h, &graph.normalized_adjacency(true).unwrap(), wv).unwrap();
            tape.value(out).clone()
        };
        let (a, b) = (run(&g), run(&p));
        for (old, &new) in perm.iter().enumerate() {
            prop_assert!(max_abs(a.row_slice(old), b.row_slice(new)) < 1e-12);
        }
    }

    #[test]
    fn basic_layer_matches_node_loop(seed in any::<u64>(), n in 1usize..25, din in 1usize..5, dout in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let g = random_graph(&mut rng, n, din, 4, 0);
        let (ws, wn, b) = (random_tensor(&mut rng, din, dout), random_tensor(&mut rng, din, dout), random_tensor(&mut rng, 1, dout));
        let mut tape = Tape::new();
        let h = tape.constant(g.features.clone());
        let vars = [ws.clone(), wn.clone(), b.clone()].map(|t| tape.constant(t));
        let out = basic_gnn_layer(&mut tape, h, &g.raw_adjacency().unwrap(), vars[0], vars[1], vars[2]).unwrap();
        let want = basic_layer_oracle(&g.features, &g.edges, &ws, &wn, &b);
        prop_assert!(max_abs(tape.value(out).data(), &want) < 1e-12);
    }
}

fn models(seed: u64, dim: usize) -> Vec<GcnModel> {
    let gcn = GcnConfig::new(dim, 3);
    let basic = GcnConfig {
        kinds: vec![LayerKind::Basic, LayerKind::Gcn],
        ..gcn.clone()
    };
    vec![GcnModel::new(gcn, seed).unwrap(), GcnModel::new(basic, seed).unwrap()]
}

#[test]
fn forward_is_permutation_invariant() {
    let mut rng = seeded_rng(5);
    for i in 0..50 {
        let n = rng.random_range(1..40);
        let g = random_graph(&mut rng, n, 6, 5, 0);
        let p = g.permuted(&random_permutation(&mut rng, n)).unwrap();
        for m in models(i, 6) {
            assert!(max_abs(&m.predict(&g).unwrap(), &m.predict(&p).unwrap()) < 1e-9);
        }
    }
}

#[test]
fn duplicating_every_node_leaves_pooled_output_unchanged() {
    // Holds for symmetric normalisation (each copy keeps its degrees); the
    // sum-aggregating basic layer is also unaffected because copies are
    // disjoint.
    let mut rng = seeded_rng(6);
    for i in 0..50 {
        let n = rng.random_range(1..30);
        let g = random_graph(&mut rng, n, 5, 4, 0);
        let d = doubled(&g);
        for m in models(i, 5) {
            assert!(max_abs(&m.predict(&g).unwrap(), &m.predict(&d).unwrap()) < 1e-9);
        }
    }
}

#[test]
fn single_node_graph_gives_a_distribution() {
    let g = WsiGraph::from_parts(Tensor::matrix(1, 3, vec![0.5, -1.0, 2.0]).unwrap(), vec![(1.0, 1.0)], 8, 0, "one", Tap::Small)
        .unwrap();
    assert!(g.edges.is_empty());
    for m in models(1, 3) {
        let p = m.predict(&g).unwrap();
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn slide_graph_with_100_patches_is_connected() {
    // 16 px tiles on a 384 px slide give over 100 tissue patches; keep the
    // first 100 in grid order.
    let (slide, label) = generate_synthetic_slide(&SyntheticSlideSpec::new(1, 77).with_size(384, 384)).unwrap();
    let mask = segment_tissue(&slide, &SegmentParams::default());
    let patches = extract_patches(&slide, &mask, 16, 0.5).unwrap();
    assert!(patches.len() >= 100, "{} patches", patches.len());
    let centroids: Vec<(f64, f64)> = patches.iter().take(100).map(|p| p.centroid).collect();
    let g = WsiGraph::from_parts(Tensor::zeros(&[100, 1]), centroids, 8, label, "s", Tap::Small).unwrap();
    assert!(g.degrees().iter().all(|&d| (8..=99).contains(&d)));

    let mut parent: Vec<usize> = (0..100).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            p[x] = find(p, p[x]);
        }
        p[x]
    }
    for &(u, v) in &g.edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    assert!((0..100).all(|i| find(&mut parent, i) == root));
}
