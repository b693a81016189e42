//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Run with `cargo test --release -p slidegraph --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use slidegraph::gcn::{basic_gnn_layer, gcn_layer, GcnConfig, GcnModel, LayerKind};
use slidegraph::metrics::{
    confusion, isup_from_gleason, kappa_from_confusion, kappa_weights, quadratic_weighted_kappa, GleasonPair,
    MetricsReport,
};
use slidegraph::pipeline::{gcn_name, Pipeline, RunConfig, RunOptions, Stage, BASELINE, ENSEMBLE};
use slidegraph::slideio::{blue_ratio_pixel, seeded_rng, RasterImage};
use slidegraph::mil::select_tiles;
use slidegraph::ssl::{info_nce, info_nce_batch, FeatureQueue, Tap};
use slidegraph::tensor::{check_gradients, GradCheck, Tensor};
use slidegraph::wsigraph::knn_graph;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- 1

const INSTANCES: usize = 100;
const GRAD_TOL: f64 = 1e-5;
const EPS: f64 = 1e-6;

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(0x6772_6164);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, c: GradCheck| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(w) => w.1 = w.1.max(c.max_rel_error),
        None => worst.push((name, c.max_rel_error)),
    };
    let e = |r: slidegraph::Result<GradCheck>| r.map_err(|e| e.to_string());

    for _ in 0..INSTANCES {
        let (m, k, n) = (rng.random_range(1..6), rng.random_range(1..6), rng.random_range(1..6));
        let a = random_tensor(&mut rng, m, k);
        let a2 = random_tensor(&mut rng, m, k);
        let b = random_tensor(&mut rng, k, n);
        let row = random_tensor(&mut rng, 1, k);
        record("matmul", e(check_gradients(&[a.clone(), b], EPS, |t, v| t.matmul(v[0], v[1])))?);
        record("add", e(check_gradients(&[a.clone(), a2.clone()], EPS, |t, v| t.add(v[0], v[1])))?);
        record("add_row", e(check_gradients(&[a.clone(), row], EPS, |t, v| t.add_row(v[0], v[1])))?);
        record("mul", e(check_gradients(&[a.clone(), a2], EPS, |t, v| t.mul(v[0], v[1])))?);
        record("scale", e(check_gradients(&[a.clone()], EPS, |t, v| Ok(t.scale(v[0], -1.7))))?);
        record("relu", e(check_gradients(&[a.clone()], EPS, |t, v| Ok(t.relu(v[0]))))?);
        record("sum", e(check_gradients(&[a.clone()], EPS, |t, v| t.sum(v[0], None)))?);
        record("sum_axis0", e(check_gradients(&[a.clone()], EPS, |t, v| t.sum(v[0], Some(0))))?);
        record("sum_axis1", e(check_gradients(&[a.clone()], EPS, |t, v| t.sum(v[0], Some(1))))?);
        record("mean", e(check_gradients(&[a.clone()], EPS, |t, v| t.mean(v[0], None)))?);
        record("mean_axis0", e(check_gradients(&[a.clone()], EPS, |t, v| t.mean(v[0], Some(0))))?);
        record("mean_axis1", e(check_gradients(&[a.clone()], EPS, |t, v| t.mean(v[0], Some(1))))?);
        record("l2_normalize_rows", e(check_gradients(&[a.clone()], EPS, |t, v| t.l2_normalize_rows(v[0])))?);

        let index: Vec<usize> = (0..2 * m).map(|_| rng.random_range(0..m)).collect();
        let weights: Vec<f64> = (0..2 * m).map(|_| rng.random_range(0.1..2.0)).collect();
        let src = random_tensor(&mut rng, 2 * m, k);
        let wide = random_tensor(&mut rng, m, n);
        record("gather_rows", e(check_gradients(&[a.clone()], EPS, |t, v| t.gather_rows(v[0], &index)))?);
        record(
            "scatter_add_rows",
            e(check_gradients(&[src], EPS, |t, v| t.scatter_add_rows(v[0], &index, Some(&weights), m)))?,
        );
        record("concat_cols", e(check_gradients(&[a, wide], EPS, |t, v| t.concat_cols(&[v[0], v[1]])))?);

        let classes = rng.random_range(2..6);
        let logits = random_tensor(&mut rng, m, classes).map(|x| 3.0 * x);
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..classes)).collect();
        record(
            "softmax_cross_entropy",
            e(check_gradients(&[logits], EPS, |t, v| t.softmax_cross_entropy(v[0], &labels)))?,
        );

        let dim = rng.random_range(2..6);
        let queue_len = rng.random_range(1..8);
        let mut queue = FeatureQueue::new(queue_len, dim).map_err(|e| e.to_string())?;
        let negatives = unit_rows(&mut rng, queue_len, dim);
        queue.enqueue(&negatives).map_err(|e| e.to_string())?;
        let keys = unit_rows(&mut rng, m, dim);
        let q = random_tensor(&mut rng, m, dim);
        record(
            "info_nce_batch",
            e(check_gradients(&[q.clone()], EPS, |t, v| {
                let z = t.l2_normalize_rows(v[0])?;
                info_nce_batch(t, z, &keys, &queue, 0.2)
            }))?,
        );
        record("info_nce_analytic", info_nce_analytic(q.row_slice(0), keys.row_slice(0), &queue)?);

        let nodes = rng.random_range(2..12);
        let (din, dout) = (rng.random_range(1..5), rng.random_range(1..5));
        let degree = rng.random_range(1..5);
        let g = random_graph(&mut rng, nodes, din, degree, 0);
        let norm = g.normalized_adjacency(true).map_err(|e| e.to_string())?;
        let raw = g.raw_adjacency().map_err(|e| e.to_string())?;
        let w = random_tensor(&mut rng, din, dout);
        let (ws, wn, bias) = (random_tensor(&mut rng, din, dout), random_tensor(&mut rng, din, dout), random_tensor(&mut rng, 1, dout));
        record(
            "gcn_layer",
            e(check_gradients(&[g.features.clone(), w], EPS, |t, v| gcn_layer(t, v[0], &norm, v[1])))?,
        );
        record(
            "basic_gnn_layer",
            e(check_gradients(&[g.features.clone(), ws, wn, bias], EPS, |t, v| {
                basic_gnn_layer(t, v[0], &raw, v[1], v[2], v[3])
            }))?,
        );
    }
    let elapsed = start.elapsed();
    let (name, err) = worst.iter().copied().fold(("", 0.0), |acc, w| if w.1 > acc.1 { w } else { acc });
    ensure(
        worst.iter().all(|w| w.1 < GRAD_TOL),
        || format!("{name} reached relative error {err:.2e}"),
    )?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "{} checks x {INSTANCES} instances, worst {name} {err:.2e}, {elapsed:.1?}",
        worst.len()
    ))
}

fn unit_rows<R: Rng>(rng: &mut R, rows: usize, dim: usize) -> Tensor {
    let mut t = random_tensor(rng, rows, dim);
    for r in t.data_mut().chunks_mut(dim) {
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-6);
        r.iter_mut().for_each(|v| *v /= n);
    }
    t
}

/// Central differences against the closed-form gradient returned by the
/// single-query loss.
fn info_nce_analytic(q: &[f64], k: &[f64], queue: &FeatureQueue) -> Result<GradCheck, String> {
    let loss = |q: &[f64]| info_nce(q, k, queue, 0.2).map(|r| r.0).map_err(|e| e.to_string());
    let (_, analytic) = info_nce(q, k, queue, 0.2).map_err(|e| e.to_string())?;
    let mut numeric = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let (mut hi, mut lo) = (q.to_vec(), q.to_vec());
        hi[i] += EPS;
        lo[i] -= EPS;
        numeric.push((loss(&hi)? - loss(&lo)?) / (2.0 * EPS));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    let abs = norm(&diff);
    Ok(GradCheck {
        max_abs_error: max_abs(&analytic, &numeric),
        max_rel_error: abs / norm(&analytic).max(norm(&numeric)).max(1e-8),
    })
}

// ---------------------------------------------------------------- 2

fn info_nce_analytics() -> Outcome {
    let mut rng = seeded_rng(0x6e63_65);
    let dim = 16;
    let q = unit_rows(&mut rng, 1, dim);
    let mut worst: f64 = 0.0;
    for k in [1usize, 8, 64] {
        let mut queue = FeatureQueue::new(k, dim).map_err(|e| e.to_string())?;
        queue
            .enqueue(&Tensor::matrix(k, dim, q.data().repeat(k)).unwrap())
            .map_err(|e| e.to_string())?;
        for tau in [0.07, 0.2, 1.0] {
            let (loss, _) = info_nce(q.data(), q.data(), &queue, tau).map_err(|e| e.to_string())?;
            let err = (loss - ((k + 1) as f64).ln()).abs();
            ensure(err < 1e-9, || format!("K={k} tau={tau}: off by {err:e}"))?;
            worst = worst.max(err);
        }
    }

    // k⁺ = e0 with negatives confined to coordinates 2.., so turning q in
    // the e0/e1 plane changes only q·k⁺.
    let draws = 1000;
    for draw in 0..draws {
        let dim = 8;
        let k = rng.random_range(1..16);
        let tail = unit_rows(&mut rng, 1 + k, dim - 2);
        let mut negatives = vec![0.0; k * dim];
        for r in 0..k {
            negatives[r * dim + 2..(r + 1) * dim].copy_from_slice(tail.row_slice(r + 1));
        }
        let mut queue = FeatureQueue::new(k, dim).map_err(|e| e.to_string())?;
        queue.enqueue(&Tensor::matrix(k, dim, negatives).unwrap()).map_err(|e| e.to_string())?;
        let mut k_pos = vec![0.0; dim];
        k_pos[0] = 1.0;
        let q_at = |angle: f64| {
            let mut q = vec![0.6 * angle.cos(), 0.6 * angle.sin()];
            q.extend(tail.row_slice(0).iter().map(|v| 0.8 * v));
            q
        };
        let a = rng.random_range(0.0..3.0);
        let da = rng.random_range(0.01..0.1);
        let tau = rng.random_range(0.05..1.0);
        let closer = info_nce(&q_at(a), &k_pos, &queue, tau).map_err(|e| e.to_string())?.0;
        let farther = info_nce(&q_at(a + da), &k_pos, &queue, tau).map_err(|e| e.to_string())?.0;
        ensure(closer < farther, || format!("draw {draw}: {closer} !< {farther}"))?;
    }
    Ok(format!("ln(K+1) worst error {worst:.1e}; {draws} monotone draws"))
}

// ---------------------------------------------------------------- 3

fn kappa_oracle_suite() -> Outcome {
    let mut rng = seeded_rng(0x6b61_7070);
    let n = 6;
    let mut worst: f64 = 0.0;
    for pair in 0..1000 {
        let len = rng.random_range(1..=100);
        let a: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        let p: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        let got = quadratic_weighted_kappa(&a, &p, n).map_err(|e| e.to_string())?;
        let want = kappa_oracle(&a, &p, n);
        let err = (got - want).abs();
        ensure(err < 1e-12 || (got.is_nan() && want.is_nan()), || {
            format!("pair {pair}: {got} vs oracle {want}")
        })?;
        if err.is_finite() {
            worst = worst.max(err);
        }
        let perfect = quadratic_weighted_kappa(&a, &a, n).map_err(|e| e.to_string())?;
        ensure(perfect == 1.0, || format!("pair {pair}: perfect agreement gave {perfect}"))?;

        let cm = confusion(&a, &p, n).map_err(|e| e.to_string())?;
        let w = kappa_weights(n);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let k1 = kappa_from_confusion(&cm, &w).map_err(|e| e.to_string())?;
        let k2 = kappa_from_confusion(&cm, &scaled).map_err(|e| e.to_string())?;
        ensure((k1 - k2).abs() < 1e-12, || format!("pair {pair}: scale {scale} moved kappa {k1} -> {k2}"))?;
    }
    Ok(format!("1000 pairs, worst oracle error {worst:.1e}"))
}

// ---------------------------------------------------------------- 4

fn knn_oracle_suite() -> Outcome {
    let mut rng = seeded_rng(0x6b6e_6e);
    let mut edges = 0;
    for set in 0..200 {
        let n = rng.random_range(1..=300);
        let k = [1, 5, 8][set % 3];
        let points = random_points(&mut rng, n);
        let got = knn_graph(&points, k).map_err(|e| e.to_string())?;
        let want: Vec<(usize, usize)> = knn_oracle(&points, k).into_iter().collect();
        ensure(got == want, || format!("set {set} (n={n}, k={k}) differs from exhaustive search"))?;
        edges += got.len();
    }
    Ok(format!("200 point sets, {edges} edges"))
}

// ---------------------------------------------------------------- 5

fn gcn_structure() -> Outcome {
    let mut rng = seeded_rng(0x6763_6e);
    let (mut perm_err, mut dup_err, mut loop_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..50u64 {
        let dim = rng.random_range(1..7);
        let n = rng.random_range(1..40);
        let degree = rng.random_range(1..8);
        let g = random_graph(&mut rng, n, dim, degree, 0);
        let p = g.permuted(&random_permutation(&mut rng, n)).map_err(|e| e.to_string())?;
        let d = doubled(&g);
        let gcn = GcnConfig::new(dim, 3);
        let basic = GcnConfig {
            kinds: vec![LayerKind::Basic, LayerKind::Gcn],
            ..gcn.clone()
        };
        for cfg in [gcn, basic] {
            let m = GcnModel::new(cfg, i).map_err(|e| e.to_string())?;
            let base = m.predict(&g).map_err(|e| e.to_string())?;
            perm_err = perm_err.max(max_abs(&base, &m.predict(&p).map_err(|e| e.to_string())?));
            dup_err = dup_err.max(max_abs(&base, &m.predict(&d).map_err(|e| e.to_string())?));
        }

        let (din, dout) = (rng.random_range(1..5), rng.random_range(1..5));
        let h = random_graph(&mut rng, n, din, 4, 0);
        let (ws, wn, b) = (random_tensor(&mut rng, din, dout), random_tensor(&mut rng, din, dout), random_tensor(&mut rng, 1, dout));
        let mut tape = slidegraph::tensor::Tape::new();
        let x = tape.constant(h.features.clone());
        let vars = [ws.clone(), wn.clone(), b.clone()].map(|t| tape.constant(t));
        let raw = h.raw_adjacency().map_err(|e| e.to_string())?;
        let out = basic_gnn_layer(&mut tape, x, &raw, vars[0], vars[1], vars[2]).map_err(|e| e.to_string())?;
        let want = basic_layer_oracle(&h.features, &h.edges, &ws, &wn, &b);
        loop_err = loop_err.max(max_abs(tape.value(out).data(), &want));
    }
    ensure(perm_err < 1e-9, || format!("permutation moved output by {perm_err:e}"))?;
    ensure(dup_err < 1e-9, || format!("duplication moved output by {dup_err:e}"))?;
    ensure(loop_err < 1e-12, || format!("basic layer off the node loop by {loop_err:e}"))?;
    Ok(format!(
        "50 graphs: permutation {perm_err:.1e}, duplication {dup_err:.1e}, node loop {loop_err:.1e}"
    ))
}

// ---------------------------------------------------------------- 6

fn blue_ratio_and_tiles() -> Outcome {
    let pixels = [([0u8, 0, 255], 25500.0), ([0, 0, 0], 0.0), ([255, 255, 255], 16.67748182287329)];
    for (rgb, want) in pixels {
        let got = blue_ratio_pixel(rgb);
        ensure((got - want).abs() < 1e-9, || format!("{rgb:?}: {got} vs {want}"))?;
    }
    let mut rng = seeded_rng(0x7469_6c65);
    for case in 0..200 {
        let n = rng.random_range(0..60);
        let bag = [4, 9, 36][case % 3];
        let patches: Vec<_> = (0..n).map(|i| random_patch(&mut rng, 8, i / 10, i % 10)).collect();
        let selected = select_tiles(&patches, bag, 8, "s", 0).map_err(|e| e.to_string())?;
        let order = select_tiles_oracle(&patches, bag);
        ensure(selected.real_tiles == order.len() && selected.tiles.len() == bag, || {
            format!("case {case}: {} real of {} tiles", selected.real_tiles, selected.tiles.len())
        })?;
        for (slot, (tile, (r, c))) in selected.tiles.iter().zip(&order).enumerate() {
            let src = patches.iter().find(|p| (p.grid_row, p.grid_col) == (*r, *c)).unwrap();
            ensure(tile == &src.pixels, || format!("case {case}: slot {slot} is not patch ({r},{c})"))?;
        }
        let white = RasterImage::white(8, 8);
        ensure(selected.tiles[order.len()..].iter().all(|t| t == &white), || {
            format!("case {case}: padding is not white")
        })?;
    }
    Ok("3 pixels exact to 1e-9; 200 bags match the sort oracle".into())
}

// ---------------------------------------------------------------- 7, 8

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const REPORTS: [&str; 4] = ["gcn-small", "gcn-large", ENSEMBLE, BASELINE];

struct SeedResult {
    seed: u64,
    kappa: [f64; 4],
}

fn run_pipeline(seed: u64, out: &Path) -> Result<(), String> {
    let mut config = RunConfig::default();
    config.seed = seed;
    config.paths.out = out.to_path_buf();
    let pipeline = Pipeline::new(config, RunOptions::default()).map_err(|e| e.to_string())?;
    pipeline.run_all().map_err(|e| format!("seed {seed}: {e}"))
}

fn kappas(out: &Path) -> Result<[f64; 4], String> {
    let layout = slidegraph::pipeline::Layout::new(out);
    let mut k = [0.0; 4];
    for (slot, name) in k.iter_mut().zip(REPORTS) {
        let report = MetricsReport::load(&layout.metrics(name)).map_err(|e| e.to_string())?;
        *slot = report.kappa().map_err(|e| e.to_string())?;
    }
    Ok(k)
}

fn end_to_end(scratch: &Path) -> Result<(String, Vec<SeedResult>), String> {
    debug_assert_eq!(REPORTS[0], gcn_name(Tap::Small));
    let start = Instant::now();
    let mut results = Vec::new();
    for seed in SEEDS {
        let out = scratch.join(format!("seed-{seed}"));
        let t = Instant::now();
        run_pipeline(seed, &out)?;
        let kappa = kappas(&out)?;
        println!(
            "    seed {seed}: small {:.4} large {:.4} ensemble {:.4} baseline {:.4} ({:.0?})",
            kappa[0],
            kappa[1],
            kappa[2],
            kappa[3],
            t.elapsed()
        );
        results.push(SeedResult { seed, kappa });
    }
    let elapsed = start.elapsed();

    let good = results.iter().filter(|r| r.kappa[2] >= 0.8).count();
    let beats = results.iter().filter(|r| r.kappa[2] >= r.kappa[3]).count();
    let mut problems = Vec::new();
    if good < 4 {
        problems.push(format!("ensemble kappa >= 0.8 in only {good}/5 seeds"));
    }
    if elapsed >= Duration::from_secs(15 * 60) {
        problems.push(format!("sweep took {elapsed:.0?}"));
    }
    for r in &results {
        let floor = r.kappa[0].min(r.kappa[1]) - 0.05;
        if r.kappa[2] < floor {
            problems.push(format!("seed {}: ensemble {:.4} below member floor {floor:.4}", r.seed, r.kappa[2]));
        }
    }
    if beats * 2 <= results.len() {
        problems.push(format!("graph pipeline matched the baseline in only {beats}/5 seeds"));
    }
    if !problems.is_empty() {
        return Err(problems.join("; "));
    }
    Ok((
        format!(
            "kappa >= 0.8 in {good}/5 seeds, ensemble >= baseline in {beats}/5, {:.0?} total",
            elapsed
        ),
        results,
    ))
}

fn determinism(scratch: &Path) -> Outcome {
    let seed = SEEDS[0];
    let first = scratch.join(format!("seed-{seed}"));
    let metrics = |root: &Path, name: &str| {
        std::fs::read(slidegraph::pipeline::Layout::new(root).metrics(name)).map_err(|e| format!("{name}: {e}"))
    };
    let reference: Vec<Vec<u8>> = REPORTS.iter().map(|n| metrics(&first, n)).collect::<Result<_, _>>()?;

    // A fresh run from nothing.
    let second = scratch.join(format!("rerun-{seed}"));
    run_pipeline(seed, &second)?;
    for (name, want) in REPORTS.iter().zip(&reference) {
        ensure(&metrics(&second, name)? == want, || format!("fresh rerun changed {name}"))?;
    }

    // Individual commands re-run in place over existing artifacts.
    let mut config = RunConfig::default();
    config.seed = seed;
    config.paths.out = first.clone();
    let pipeline = Pipeline::new(config, RunOptions::default()).map_err(|e| e.to_string())?;
    for stage in [Stage::Graph, Stage::TrainGcn, Stage::TrainBaseline, Stage::Evaluate] {
        pipeline.run_stage(stage).map_err(|e| e.to_string())?;
        for (name, want) in REPORTS.iter().zip(&reference) {
            ensure(&metrics(&first, name)? == want, || {
                format!("re-running {} changed {name}", stage.as_str())
            })?;
        }
    }
    Ok(format!("seed {seed}: fresh rerun and in-place reruns byte-identical"))
}

// ---------------------------------------------------------------- 9

fn isup_rows() -> Outcome {
    // One entry per table row; each lists every pair that row covers.
    let rows: [(&str, &[(u8, u8)], u8); 5] = [
        ("6", &[(3, 3)], 1),
        ("7 (3+4)", &[(3, 4)], 2),
        ("7 (4+3)", &[(4, 3)], 3),
        ("8", &[(4, 4), (3, 5), (5, 3)], 4),
        ("9-10", &[(4, 5), (5, 4), (5, 5)], 5),
    ];
    for (label, pairs, grade) in rows {
        for &(p, s) in pairs {
            let pair = GleasonPair::new(p, s).map_err(|e| e.to_string())?;
            let got = isup_from_gleason(pair).map_err(|e| e.to_string())?;
            ensure(got == grade, || format!("{p}+{s} (row {label}) gave {got}, want {grade}"))?;
        }
    }
    Ok("5 rows".into())
}

// ----------------------------------------------------------------

fn run(id: usize, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS {id} {title}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {id} {title}: {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let mut passed = vec![
        run(1, "gradient suite", gradient_suite),
        run(2, "InfoNCE analytics", info_nce_analytics),
        run(3, "kappa oracle", kappa_oracle_suite),
        run(4, "k-NN oracle", knn_oracle_suite),
        run(5, "GCN structural properties", gcn_structure),
        run(6, "blue ratio and tile selection", blue_ratio_and_tiles),
    ];
    let mut sweep_ok = false;
    passed.push(run(7, "end-to-end synthetic", || {
        let (detail, _) = end_to_end(scratch.path())?;
        sweep_ok = true;
        Ok(detail)
    }));
    passed.push(run(8, "determinism", || {
        if !sweep_ok {
            // The sweep's first seed is the reference; produce it if the
            // sweep stopped early.
            run_pipeline(SEEDS[0], &scratch.path().join(format!("seed-{}", SEEDS[0])))?;
        }
        determinism(scratch.path())
    }));
    passed.push(run(9, "ISUP mapping", isup_rows));

    let failed = passed.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", passed.len() - failed, passed.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
