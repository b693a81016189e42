use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gcn::{GcnConfig, LayerKind, TrainConfig};
use crate::mil::BaselineConfig;
use crate::slideio::SegmentParams;
use crate::ssl::{AugmentationParams, EncoderConfig, PretrainConfig};

/// Synthetic corpus and split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub slides: usize,
    pub classes: usize,
    pub slide_size: usize,
    /// Fraction of each class held out for testing.
    pub test_fraction: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            slides: 150,
            classes: 3,
            slide_size: 256,
            test_fraction: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentSection {
    pub luminance_threshold: f64,
    pub min_region_px: usize,
}

impl Default for SegmentSection {
    fn default() -> Self {
        let p = SegmentParams::default();
        Self {
            luminance_threshold: p.luminance_threshold,
            min_region_px: p.min_region_px,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSection {
    pub size: usize,
    pub min_tissue_fraction: f64,
}

impl Default for PatchSection {
    fn default() -> Self {
        Self {
            size: 32,
            min_tissue_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSection {
    pub hidden: Vec<usize>,
    pub tap_small_dim: usize,
    pub tap_large_dim: usize,
    pub projection_dim: usize,
}

impl Default for EncoderSection {
    fn default() -> Self {
        let e = EncoderConfig::default();
        Self {
            hidden: e.hidden,
            tap_small_dim: e.tap_small_dim,
            tap_large_dim: e.tap_large_dim,
            projection_dim: e.projection_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub p_hflip: f64,
    pub p_vflip: f64,
    pub contrast: [f64; 2],
    pub p_blur: f64,
    pub blur_sigma: [f64; 2],
}

impl Default for AugmentSection {
    fn default() -> Self {
        let a = AugmentationParams::default();
        Self {
            p_hflip: a.p_hflip,
            p_vflip: a.p_vflip,
            contrast: [a.contrast.0, a.contrast.1],
            p_blur: a.p_blur,
            blur_sigma: [a.blur_sigma.0, a.blur_sigma.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub temperature: f64,
    pub momentum: f64,
    pub queue_capacity: usize,
    /// 0 trains on every patch.
    pub max_patches: usize,
}

impl Default for PretrainSection {
    fn default() -> Self {
        let p = PretrainConfig::default();
        Self {
            epochs: p.epochs,
            batch_size: p.batch_size,
            lr: p.lr,
            weight_decay: p.weight_decay,
            temperature: p.temperature,
            momentum: p.momentum,
            queue_capacity: p.queue_capacity,
            max_patches: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub k: usize,
    pub self_loops: bool,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            k: crate::wsigraph::DEFAULT_K,
            self_loops: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcnSection {
    pub widths: Vec<usize>,
    /// `gcn` or `basic`, one per width.
    pub kinds: Vec<String>,
    pub head: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
}

impl Default for GcnSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            widths: vec![128, 128],
            kinds: vec!["gcn".into(), "gcn".into()],
            head: vec![64],
            epochs: t.epochs,
            lr: t.lr,
            weight_decay: t.weight_decay,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub bag_size: usize,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            bag_size: crate::mil::DEFAULT_BAG_SIZE,
            hidden: vec![64],
            epochs: 30,
            lr: 1e-3,
            weight_decay: 1e-6,
        }
    }
}

/// Locations; not part of the config hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub out: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self { out: PathBuf::from("out") }
    }
}

/// Every tunable of a pipeline run. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataSection,
    pub segment: SegmentSection,
    pub patch: PatchSection,
    pub encoder: EncoderSection,
    pub augment: AugmentSection,
    pub pretrain: PretrainSection,
    pub graph: GraphSection,
    pub gcn: GcnSection,
    pub baseline: BaselineSection,
    pub paths: PathsSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML of the fully resolved config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML with
    /// `[paths]` reset to defaults, so relocating a run keeps its hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.paths = PathsSection::default();
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.data.classes < 2 {
            return err(format!("data.classes must be at least 2, got {}", self.data.classes));
        }
        if self.data.slides < self.data.classes {
            return err(format!(
                "data.slides ({}) must cover every class ({})",
                self.data.slides, self.data.classes
            ));
        }
        if !(0.0..1.0).contains(&self.data.test_fraction) {
            return err(format!("data.test_fraction must be in [0, 1), got {}", self.data.test_fraction));
        }
        if self.patch.size == 0 || self.data.slide_size < self.patch.size {
            return err(format!(
                "patch.size {} must be positive and fit in data.slide_size {}",
                self.patch.size, self.data.slide_size
            ));
        }
        if !(0.0..=1.0).contains(&self.patch.min_tissue_fraction) {
            return err("patch.min_tissue_fraction must be in [0, 1]".into());
        }
        if self.graph.k == 0 {
            return err("graph.k must be positive".into());
        }
        self.encoder_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.augmentation().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.pretrain_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        for kind in &self.gcn.kinds {
            kind.parse::<LayerKind>().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.gcn_config(1).validate().map_err(|e| Error::Config(e.to_string()))?;
        self.gcn_train(0).validate().map_err(|e| Error::Config(e.to_string()))?;
        self.baseline_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.baseline_train(0).validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn segment_params(&self) -> SegmentParams {
        SegmentParams {
            luminance_threshold: self.segment.luminance_threshold,
            min_region_px: self.segment.min_region_px,
        }
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            patch_size: self.patch.size,
            hidden: self.encoder.hidden.clone(),
            tap_small_dim: self.encoder.tap_small_dim,
            tap_large_dim: self.encoder.tap_large_dim,
            projection_dim: self.encoder.projection_dim,
        }
    }

    pub fn augmentation(&self) -> AugmentationParams {
        let a = &self.augment;
        AugmentationParams {
            p_hflip: a.p_hflip,
            p_vflip: a.p_vflip,
            contrast: (a.contrast[0], a.contrast[1]),
            p_blur: a.p_blur,
            blur_sigma: (a.blur_sigma[0], a.blur_sigma[1]),
        }
    }

    pub fn pretrain_config(&self) -> PretrainConfig {
        let p = &self.pretrain;
        PretrainConfig {
            epochs: p.epochs,
            batch_size: p.batch_size,
            lr: p.lr,
            weight_decay: p.weight_decay,
            temperature: p.temperature,
            momentum: p.momentum,
            queue_capacity: p.queue_capacity,
            max_patches: (p.max_patches > 0).then_some(p.max_patches),
        }
    }

    pub fn gcn_config(&self, input_dim: usize) -> GcnConfig {
        GcnConfig {
            input_dim,
            widths: self.gcn.widths.clone(),
            kinds: self
                .gcn
                .kinds
                .iter()
                .map(|k| k.parse().unwrap_or(LayerKind::Gcn))
                .collect(),
            head: self.gcn.head.clone(),
            classes: self.data.classes,
            self_loops: self.graph.self_loops,
        }
    }

    pub fn gcn_train(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.gcn.epochs,
            lr: self.gcn.lr,
            weight_decay: self.gcn.weight_decay,
            floor_lr: 0.0,
            seed,
        }
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            bag_size: self.baseline.bag_size,
            hidden: self.baseline.hidden.clone(),
            classes: self.data.classes,
        }
    }

    pub fn baseline_train(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.baseline.epochs,
            lr: self.baseline.lr,
            weight_decay: self.baseline.weight_decay,
            floor_lr: 0.0,
            seed,
        }
    }
}
