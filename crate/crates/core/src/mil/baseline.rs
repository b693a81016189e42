use rand::seq::SliceRandom;

use super::{concat_bag, mosaic_cells, TileBag};
use crate::error::{contract, Error, Result};
use crate::gcn::TrainConfig;
use crate::metrics::EpochRecord;
use crate::nn::Mlp;
use crate::slideio::{derive_seed, mean_blue_ratio, seeded_rng};
use crate::tensor::{adam_step, AdamConfig, AdamState, Checkpoint, CosineSchedule, ParamSet, Tape, Tensor};

/// Features per mosaic cell: mean R, G, B in `[0, 1]` and `ln(1 + mean Br) / 10`.
pub const CELL_FEATURES: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineConfig {
    pub bag_size: usize,
    pub hidden: Vec<usize>,
    pub classes: usize,
}

impl BaselineConfig {
    pub fn new(classes: usize) -> Self {
        Self {
            bag_size: super::DEFAULT_BAG_SIZE,
            hidden: vec![64],
            classes,
        }
    }

    fn mlp(&self) -> Mlp {
        let mut dims = vec![self.bag_size * CELL_FEATURES];
        dims.extend(&self.hidden);
        dims.push(self.classes);
        Mlp::new(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bag_size == 0 || self.hidden.contains(&0) || self.classes < 2 {
            return Err(contract(format!("invalid baseline config {self:?}")));
        }
        Ok(())
    }
}

/// Per-cell colour and blue-ratio statistics of the bag's mosaic, cell by
/// cell in row-major order.
pub fn bag_features(bag: &TileBag) -> Result<Vec<f64>> {
    let mosaic = concat_bag(bag)?;
    let side = (bag.tiles.len() as f64).sqrt().round() as usize;
    let mut out = Vec::with_capacity(bag.tiles.len() * CELL_FEATURES);
    for cell in mosaic_cells(&mosaic, side)? {
        let n = (cell.width() * cell.height()) as f64;
        let mut sums = [0.0; 3];
        for px in cell.pixels() {
            for c in 0..3 {
                sums[c] += px[c] as f64;
            }
        }
        out.extend(sums.iter().map(|s| s / n / 255.0));
        out.push(mean_blue_ratio(&cell).ln_1p() / 10.0);
    }
    Ok(out)
}

/// MLP over standardised [`bag_features`]. The per-feature mean and scale
/// are fitted on the training bags and travel with the checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineModel {
    pub config: BaselineConfig,
    pub params: ParamSet,
    pub feature_mean: Vec<f64>,
    /// Standard deviation per feature; constant features get 1.
    pub feature_scale: Vec<f64>,
}

impl BaselineModel {
    pub fn new(config: BaselineConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut params = ParamSet::new();
        config.mlp().init(&mut params, "mlp", &mut seeded_rng(seed));
        let dim = config.bag_size * CELL_FEATURES;
        Ok(Self {
            config,
            params,
            feature_mean: vec![0.0; dim],
            feature_scale: vec![1.0; dim],
        })
    }

    /// Fits the standardisation to `rows` (each one bag's features).
    fn fit_standardizer(&mut self, rows: &[Vec<f64>]) {
        let n = rows.len() as f64;
        for j in 0..self.feature_mean.len() {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            self.feature_mean[j] = mean;
            self.feature_scale[j] = if var.sqrt() > 1e-8 { var.sqrt() } else { 1.0 };
        }
    }

    fn standardize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.feature_mean.iter().zip(&self.feature_scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    fn check_bag(&self, bag: &TileBag) -> Result<()> {
        if bag.tiles.len() != self.config.bag_size {
            return Err(contract(format!(
                "bag {} has {} tiles, model expects {}",
                bag.slide_id,
                bag.tiles.len(),
                self.config.bag_size
            )));
        }
        Ok(())
    }

    pub fn predict(&self, bag: &TileBag) -> Result<Vec<f64>> {
        self.check_bag(bag)?;
        self.predict_features(&bag_features(bag)?)
    }

    fn predict_features(&self, features: &[f64]) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let vars = self.params.register_frozen(&mut tape);
        let x = tape.constant(Tensor::row(self.standardize(features))?);
        let logits = self.config.mlp().forward(&mut tape, &vars, x, false)?;
        Ok(crate::gcn::softmax_probs(tape.value(logits).data()))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let hidden: Vec<String> = self.config.hidden.iter().map(ToString::to_string).collect();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        Checkpoint::new(self.params.clone())
            .with_meta("kind", "baseline")
            .with_meta("baseline.bag_size", self.config.bag_size.to_string())
            .with_meta("baseline.hidden", hidden.join(","))
            .with_meta("baseline.classes", self.config.classes.to_string())
            .with_meta("baseline.feature_mean", list(&self.feature_mean))
            .with_meta("baseline.feature_scale", list(&self.feature_scale))
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let bad = |detail: String| Error::Format {
            what: "checkpoint",
            detail,
        };
        if ck.meta("kind") != Some("baseline") {
            return Err(bad(format!("expected a baseline checkpoint, found kind {:?}", ck.meta("kind"))));
        }
        let num = |k: &str| -> Result<usize> { ck.require_meta(k)?.parse().map_err(|_| bad(format!("bad {k}"))) };
        let hidden = ck
            .require_meta("baseline.hidden")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| bad("bad baseline.hidden".into())))
            .collect::<Result<Vec<usize>>>()?;
        let config = BaselineConfig {
            bag_size: num("baseline.bag_size")?,
            hidden,
            classes: num("baseline.classes")?,
        };
        let dim = config.bag_size * CELL_FEATURES;
        let floats = |k: &str| -> Result<Vec<f64>> {
            let v = ck
                .require_meta(k)?
                .split(',')
                .map(|s| s.parse().map_err(|_| bad(format!("bad {k}"))))
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != dim {
                return Err(bad(format!("{k} has {} values, expected {dim}", v.len())));
            }
            Ok(v)
        };
        BaselineModel::new(config.clone(), 0)?.params.check_compatible(&ck.params)?;
        Ok(Self {
            config,
            params: ck.params.clone(),
            feature_mean: floats("baseline.feature_mean")?,
            feature_scale: floats("baseline.feature_scale")?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BaselineOutcome {
    pub model: BaselineModel,
    pub history: Vec<EpochRecord>,
}

/// Per-bag Adam training with a cosine schedule, seeded like the GCN
/// trainer (`derive_seed(seed, 0)` for weights, `derive_seed(seed, 1)` for
/// the shuffle). Feature standardisation is fitted on `bags` first.
pub fn train_baseline(bags: &[&TileBag], config: BaselineConfig, train: &TrainConfig) -> Result<BaselineOutcome> {
    train.validate()?;
    if bags.is_empty() {
        return Err(contract("no training bags"));
    }
    if let Some(b) = bags.iter().find(|b| b.label >= config.classes) {
        return Err(contract(format!(
            "bag {} has label {} but the model has {} classes",
            b.slide_id, b.label, config.classes
        )));
    }
    let mut model = BaselineModel::new(config, derive_seed(train.seed, 0))?;
    let raw = bags
        .iter()
        .map(|b| {
            model.check_bag(b)?;
            bag_features(b)
        })
        .collect::<Result<Vec<_>>>()?;
    model.fit_standardizer(&raw);
    let inputs = raw
        .iter()
        .map(|f| Tensor::row(model.standardize(f)))
        .collect::<Result<Vec<_>>>()?;
    let mlp = model.config.mlp();
    let mut rng = seeded_rng(derive_seed(train.seed, 1));
    let mut adam = AdamState::new(
        model.params.tensors(),
        AdamConfig {
            weight_decay: train.weight_decay,
            ..AdamConfig::default()
        },
    );
    let schedule = CosineSchedule {
        floor_lr: train.floor_lr,
        ..CosineSchedule::new(train.lr, (train.epochs * bags.len()) as u64)
    };
    let mut order: Vec<usize> = (0..bags.len()).collect();
    let mut history = Vec::with_capacity(train.epochs);
    let mut step = 0u64;
    for epoch in 0..train.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut lr = schedule.lr(step);
        for &i in &order {
            let mut tape = Tape::new();
            let vars = model.params.register(&mut tape);
            let x = tape.constant(inputs[i].clone());
            let logits = mlp.forward(&mut tape, &vars, x, false)?;
            let loss = tape.softmax_cross_entropy(logits, &[bags[i].label])?;
            sum += tape.value(loss).item();
            let grads = tape.backward(loss)?.collect(&vars);
            lr = schedule.lr(step);
            adam_step(model.params.tensors_mut(), &grads, &mut adam, lr)?;
            step += 1;
        }
        history.push(EpochRecord {
            epoch,
            mean_loss: sum / bags.len() as f64,
            lr,
        });
    }
    Ok(BaselineOutcome { model, history })
}
