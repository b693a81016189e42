//! Trains a GCN on small random graphs whose node features carry the
//! class in a noisy mean shift, then scores a held-out set.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use slidegraph::gcn::{argmax, train, GcnConfig, TrainConfig};
use slidegraph::metrics::quadratic_weighted_kappa;
use slidegraph::slideio::seeded_rng;
use slidegraph::ssl::Tap;
use slidegraph::tensor::Tensor;
use slidegraph::wsigraph::WsiGraph;

const CLASSES: usize = 3;
const DIM: usize = 8;

fn graph(i: usize, rng: &mut impl Rng) -> slidegraph::Result<WsiGraph> {
    let label = i % CLASSES;
    let n = rng.random_range(6..20);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let centroids = (0..n).map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
    let data = (0..n * DIM)
        .map(|j| noise.sample(rng) + if j % DIM == label { 1.5 } else { 0.0 })
        .collect();
    WsiGraph::from_parts(Tensor::matrix(n, DIM, data)?, centroids, 4, label, &format!("g{i}"), Tap::Small)
}

fn main() -> slidegraph::Result<()> {
    let mut rng = seeded_rng(21);
    let graphs: Vec<WsiGraph> = (0..90).map(|i| graph(i, &mut rng)).collect::<slidegraph::Result<_>>()?;
    let (train_set, test_set) = graphs.split_at(60);
    let refs: Vec<&WsiGraph> = train_set.iter().collect();
    let config = TrainConfig {
        epochs: 20,
        lr: 1e-3,
        ..TrainConfig::default()
    };
    let outcome = train(&refs, GcnConfig::new(DIM, CLASSES), &config)?;
    for r in outcome.history.iter().step_by(4) {
        println!("epoch {:>2}  loss {:.4}", r.epoch, r.mean_loss);
    }
    let actual: Vec<usize> = test_set.iter().map(|g| g.label).collect();
    let predicted = test_set
        .iter()
        .map(|g| Ok(argmax(&outcome.model.predict(g)?)))
        .collect::<slidegraph::Result<Vec<_>>>()?;
    println!("held-out kappa {:.3}", quadratic_weighted_kappa(&actual, &predicted, CLASSES)?);
    Ok(())
}
