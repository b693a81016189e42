use rand::seq::SliceRandom;

use super::{augment, info_nce_batch, AugmentationParams, Encoder, EncoderConfig, FeatureQueue};
use crate::error::{contract, Result};
use crate::metrics::EpochRecord;
use crate::slideio::{derive_seed, seeded_rng, RasterImage, SlideRng};
use crate::tensor::{adam_step, linalg, AdamConfig, AdamState, CosineSchedule, ParamSet, Tape, Tensor};

/// Contrastive training hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub temperature: f64,
    pub momentum: f64,
    pub queue_capacity: usize,
    /// Train on a seeded random subset of at most this many patches.
    pub max_patches: Option<usize>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            lr: 1e-3,
            weight_decay: 1e-6,
            temperature: 0.2,
            momentum: 0.99,
            queue_capacity: 4096,
            max_patches: None,
        }
    }
}

impl PretrainConfig {
    /// 75 epochs, batch 256, lr 3e-3.
    pub fn paper_scale() -> Self {
        Self {
            epochs: 75,
            batch_size: 256,
            lr: 3e-3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.queue_capacity == 0 {
            return Err(contract(format!("epochs, batch size and queue capacity must be positive: {self:?}")));
        }
        if !(self.temperature > 0.0) {
            return Err(contract(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return Err(contract(format!("momentum must be in [0, 1], got {}", self.momentum)));
        }
        if !(self.lr >= 0.0) || !(self.weight_decay >= 0.0) {
            return Err(contract("learning rate and weight decay must be non-negative"));
        }
        if self.max_patches == Some(0) {
            return Err(contract("max_patches must be positive when set"));
        }
        Ok(())
    }
}

/// `θk ← m·θk + (1−m)·θq`, elementwise.
pub fn momentum_update(query: &ParamSet, key: &mut ParamSet, m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(contract(format!("momentum must be in [0, 1], got {m}")));
    }
    query.check_compatible(key).map_err(|e| contract(e.to_string()))?;
    for (k, q) in key.tensors_mut().iter_mut().zip(query.tensors()) {
        for (kv, qv) in k.data_mut().iter_mut().zip(q.data()) {
            *kv = m * *kv + (1.0 - m) * qv;
        }
    }
    Ok(())
}

/// Training state: query encoder, momentum encoder, key queue, optimizer.
#[derive(Clone, Debug)]
pub struct Pretrainer {
    pub query: Encoder,
    pub key: Encoder,
    pub queue: FeatureQueue,
    pub adam: AdamState,
    pub schedule: CosineSchedule,
    pub augmentation: AugmentationParams,
    pub config: PretrainConfig,
    batch_size: usize,
    step: u64,
    epoch: usize,
    rng: SlideRng,
}

impl Pretrainer {
    /// Prepares to train on `patch_count` patches. The batch size is clamped
    /// to the patch count and the queue to `patch_count − batch` keys (at
    /// least one), so a full queue never holds more keys than there are
    /// patches outside the current batch.
    pub fn new(
        encoder: EncoderConfig,
        augmentation: AugmentationParams,
        config: PretrainConfig,
        patch_count: usize,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        augmentation.validate()?;
        if patch_count < 2 {
            return Err(contract(format!("pretraining needs at least 2 patches, got {patch_count}")));
        }
        let batch_size = if config.batch_size > patch_count {
            log::warn!("batch size {} exceeds {patch_count} patches; clamping", config.batch_size);
            patch_count
        } else {
            config.batch_size
        };
        let capacity = config.queue_capacity.min((patch_count - batch_size).max(1));
        let query = Encoder::new(encoder, derive_seed(seed, 0))?;
        let key = query.clone();
        let queue = FeatureQueue::new(capacity, query.config.projection_dim)?;
        let adam = AdamState::new(
            query.params.tensors(),
            AdamConfig {
                weight_decay: config.weight_decay,
                ..AdamConfig::default()
            },
        );
        let steps_per_epoch = patch_count.div_ceil(batch_size);
        let schedule = CosineSchedule::new(config.lr, (config.epochs * steps_per_epoch) as u64);
        Ok(Self {
            query,
            key,
            queue,
            adam,
            schedule,
            augmentation,
            config,
            batch_size,
            step: 0,
            epoch: 0,
            rng: seeded_rng(derive_seed(seed, 1)),
        })
    }

    /// Sets the input centring of both encoders.
    pub fn set_input_mean(&mut self, mean: [f64; 3]) {
        self.query.input_mean = mean;
        self.key.input_mean = mean;
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One optimisation step on `batch`; returns the mean InfoNCE loss.
    pub fn step(&mut self, batch: &[&RasterImage]) -> Result<f64> {
        if batch.is_empty() {
            return Err(contract("empty pretraining batch"));
        }
        let mut q_views = Vec::with_capacity(batch.len());
        let mut k_views = Vec::with_capacity(batch.len());
        for img in batch {
            q_views.push(augment(img, &self.augmentation, &mut self.rng));
            k_views.push(augment(img, &self.augmentation, &mut self.rng));
        }
        let xq = self.query.input(&q_views.iter().collect::<Vec<_>>())?;
        let xk = self.key.input(&k_views.iter().collect::<Vec<_>>())?;
        let k = self.key.project(&xk)?;

        let mut tape = Tape::new();
        let vars = self.query.params.register(&mut tape);
        let x = tape.constant(xq);
        let out = self.query.forward(&mut tape, &vars, x)?;
        let q = tape.l2_normalize_rows(out.projection)?;
        let loss = info_nce_batch(&mut tape, q, &k, &self.queue, self.config.temperature)?;
        let loss_value = tape.value(loss).item();
        let grads = tape.backward(loss)?.collect(&vars);

        let lr = self.schedule.lr(self.step);
        adam_step(self.query.params.tensors_mut(), &grads, &mut self.adam, lr)?;
        momentum_update(&self.query.params, &mut self.key.params, self.config.momentum)?;
        self.enqueue_unit_rows(&k)?;
        self.step += 1;
        Ok(loss_value)
    }

    // A key whose projection is exactly zero (all small-tap units dead) has
    // no direction; it is dropped rather than stored.
    fn enqueue_unit_rows(&mut self, k: &Tensor) -> Result<()> {
        let d = k.cols();
        let rows: Vec<f64> = (0..k.rows())
            .map(|r| k.row_slice(r))
            .filter(|row| linalg::dot(row, row) > 0.5)
            .flatten()
            .copied()
            .collect();
        if rows.is_empty() {
            return Ok(());
        }
        self.queue
            .enqueue(&Tensor::new(vec![rows.len() / d, d], rows)?)
    }

    /// Fills the queue with keys of augmented views of `patches` from the
    /// current momentum encoder, visiting patches in a seeded order and
    /// wrapping around if the queue is larger than the set. Starting full
    /// keeps the number of negatives, and so the loss scale, constant from
    /// the first step.
    pub fn prime_queue(&mut self, patches: &[&RasterImage]) -> Result<()> {
        if patches.is_empty() {
            return Err(contract("cannot prime the queue from zero patches"));
        }
        let mut order: Vec<usize> = (0..patches.len()).collect();
        order.shuffle(&mut self.rng);
        let want = self.queue.capacity();
        let mut filled = 0;
        while filled < want {
            let take = (want - filled).min(self.batch_size);
            let views: Vec<RasterImage> = (filled..filled + take)
                .map(|i| augment(patches[order[i % order.len()]], &self.augmentation, &mut self.rng))
                .collect();
            let k = self.key.project(&self.key.input(&views.iter().collect::<Vec<_>>())?)?;
            self.enqueue_unit_rows(&k)?;
            filled += take;
        }
        Ok(())
    }

    /// One pass over `patches` in a seeded shuffled order; returns the mean
    /// batch loss.
    pub fn run_epoch(&mut self, patches: &[&RasterImage]) -> Result<f64> {
        let mut order: Vec<usize> = (0..patches.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(self.batch_size) {
            let batch: Vec<&RasterImage> = chunk.iter().map(|&i| patches[i]).collect();
            total += self.step(&batch)?;
            batches += 1;
        }
        self.epoch += 1;
        Ok(total / batches as f64)
    }
}

/// Mean of each channel over all pixels of `patches`, in `[-1, 1]` units.
pub fn channel_mean(patches: &[&RasterImage]) -> [f64; 3] {
    let mut sums = [0u64; 3];
    let mut count = 0u64;
    for img in patches {
        for px in img.pixels() {
            for c in 0..3 {
                sums[c] += px[c] as u64;
            }
            count += 1;
        }
    }
    if count == 0 {
        return [0.0; 3];
    }
    sums.map(|s| s as f64 / count as f64 / 127.5 - 1.0)
}

/// Result of [`pretrain`].
#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    pub encoder: Encoder,
    pub momentum_encoder: Encoder,
    /// Mean InfoNCE loss and final learning rate per epoch.
    pub history: Vec<EpochRecord>,
    pub steps: u64,
    /// Number of patches actually trained on after subsetting.
    pub patches_used: usize,
}

/// Trains a patch encoder by momentum contrast. Deterministic given `seed`.
pub fn pretrain(
    patches: &[&RasterImage],
    encoder: EncoderConfig,
    augmentation: AugmentationParams,
    config: PretrainConfig,
    seed: u64,
) -> Result<PretrainOutcome> {
    let mut chosen: Vec<&RasterImage> = patches.to_vec();
    if let Some(limit) = config.max_patches {
        if chosen.len() > limit {
            let mut idx: Vec<usize> = (0..chosen.len()).collect();
            idx.shuffle(&mut seeded_rng(derive_seed(seed, 2)));
            idx.truncate(limit);
            idx.sort_unstable();
            chosen = idx.into_iter().map(|i| patches[i]).collect();
        }
    }
    let epochs = config.epochs;
    let mut trainer = Pretrainer::new(encoder, augmentation, config, chosen.len(), seed)?;
    trainer.set_input_mean(channel_mean(&chosen));
    trainer.prime_queue(&chosen)?;
    let mut history = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mean_loss = trainer.run_epoch(&chosen)?;
        let lr = trainer.schedule.lr(trainer.steps_taken().saturating_sub(1));
        log::info!("pretrain epoch {epoch}: loss {mean_loss:.6}");
        history.push(EpochRecord { epoch, mean_loss, lr });
    }
    Ok(PretrainOutcome {
        steps: trainer.steps_taken(),
        encoder: trainer.query,
        momentum_encoder: trainer.key,
        history,
        patches_used: chosen.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v: f64) -> ParamSet {
        let mut p = ParamSet::new();
        p.push("a", Tensor::full(&[2, 2], v));
        p
    }

    #[test]
    fn momentum_update_examples() {
        let q = params(2.0);
        let mut k = params(0.0);
        momentum_update(&q, &mut k, 1.0).unwrap();
        assert!(k.bitwise_eq(&params(0.0)));
        momentum_update(&q, &mut k, 0.5).unwrap();
        assert!(k.bitwise_eq(&params(1.0)));
        momentum_update(&q, &mut k, 0.0).unwrap();
        assert!(k.bitwise_eq(&q));
        assert!(momentum_update(&q, &mut k, 1.5).is_err());
        let mut other = ParamSet::new();
        other.push("a", Tensor::zeros(&[3]));
        assert!(momentum_update(&q, &mut other, 0.5).is_err());
    }

    #[test]
    fn config_validation_and_scales() {
        assert!(PretrainConfig::default().validate().is_ok());
        assert_eq!(PretrainConfig::default().temperature, 0.2);
        let p = PretrainConfig::paper_scale();
        assert_eq!((p.epochs, p.batch_size, p.lr), (75, 256, 3e-3));
        let bad = PretrainConfig {
            temperature: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
