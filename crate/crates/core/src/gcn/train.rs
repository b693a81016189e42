use rand::seq::SliceRandom;

use super::{GcnConfig, GcnModel};
use crate::error::{contract, Result};
use crate::metrics::EpochRecord;
use crate::slideio::{derive_seed, seeded_rng};
use crate::tensor::{adam_step, AdamConfig, AdamState, CosineSchedule, Tape};
use crate::wsigraph::WsiGraph;

/// Per-graph (batch size 1) Adam training with a cosine schedule over all
/// steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub floor_lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            lr: 1e-4,
            weight_decay: 1e-6,
            floor_lr: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(contract("epochs must be positive"));
        }
        if !(self.lr >= 0.0) || !(self.weight_decay >= 0.0) || !(self.floor_lr >= 0.0) || self.floor_lr > self.lr {
            return Err(contract(format!("invalid learning-rate settings: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub history: Vec<EpochRecord>,
}

/// Trains a fresh model on `graphs` (labels taken from each graph).
/// Parameters are initialised from `derive_seed(seed, 0)` and the epoch
/// order is shuffled from `derive_seed(seed, 1)`.
pub fn train(graphs: &[&WsiGraph], model: GcnConfig, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if graphs.is_empty() {
        return Err(contract("no training graphs"));
    }
    let classes = model.classes;
    if let Some(g) = graphs.iter().find(|g| g.label >= classes) {
        return Err(contract(format!(
            "graph {} has label {} but the model has {classes} classes",
            g.slide_id, g.label
        )));
    }
    let mut model = GcnModel::new(model, derive_seed(config.seed, 0))?;
    let mut rng = seeded_rng(derive_seed(config.seed, 1));
    let mut adam = AdamState::new(
        model.params.tensors(),
        AdamConfig {
            weight_decay: config.weight_decay,
            ..AdamConfig::default()
        },
    );
    let total = (config.epochs * graphs.len()) as u64;
    let schedule = CosineSchedule {
        floor_lr: config.floor_lr,
        ..CosineSchedule::new(config.lr, total)
    };
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut step = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut lr = schedule.lr(step);
        for &i in &order {
            let g = graphs[i];
            let mut tape = Tape::new();
            let vars = model.params.register(&mut tape);
            let logits = model.forward(&mut tape, &vars, g)?;
            let loss = tape.softmax_cross_entropy(logits, &[g.label])?;
            sum += tape.value(loss).item();
            let grads = tape.backward(loss)?.collect(&vars);
            lr = schedule.lr(step);
            adam_step(model.params.tensors_mut(), &grads, &mut adam, lr)?;
            step += 1;
        }
        let mean_loss = sum / graphs.len() as f64;
        log::debug!("gcn epoch {epoch}: loss {mean_loss:.6} lr {lr:.3e}");
        history.push(EpochRecord { epoch, mean_loss, lr });
    }
    Ok(TrainOutcome { model, history })
}
