//! Stage-per-command orchestration of the full pipeline.
//!
//! Every stage reads the artifacts of earlier stages from the output
//! directory and writes its own, each stamped with the config hash (see
//! [`RunConfig::hash`]). Stages are deterministic given the config, so
//! re-running one reproduces its outputs byte for byte.
//!
//! Output directory layout:
//!
//! ```text
//! config.toml                      resolved config of the last command
//! manifest.tsv                     slide path, label, split
//! slides/slide-NNN.ppm
//! masks/slide-NNN.pgm
//! patches/slide-NNN.sgp
//! encoder.ckpt
//! features/{small,large}/slide-NNN.sgf
//! graphs/{small,large}/slide-NNN.sgg
//! models/{gcn-small,gcn-large,baseline}.ckpt
//! logs/{pretrain,gcn-small,gcn-large,baseline}.log
//! metrics/{gcn-small,gcn-large,ensemble,baseline}.txt
//! report/{loss_curves,kappa}.{csv,svg}
//! ```

mod config;
mod plots;
mod stages;

use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use config::{
    AugmentSection, BaselineSection, DataSection, EncoderSection, GcnSection, GraphSection, PatchSection,
    PathsSection, PretrainSection, RunConfig, SegmentSection,
};
pub use plots::{bar_chart_svg, line_chart_svg, Series};

use crate::error::{Error, Result};
use crate::ssl::Tap;

/// Seed streams split off the run seed with `derive_seed`.
pub mod streams {
    pub const SYNTH: u64 = 1;
    pub const PRETRAIN: u64 = 2;
    pub const GCN_SMALL: u64 = 3;
    pub const GCN_LARGE: u64 = 4;
    pub const BASELINE: u64 = 5;
    pub const SPLIT: u64 = 6;
}

/// Comment line carrying the config hash in text and image artifacts.
pub const HASH_PREFIX: &str = "config-hash: ";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Synth,
    Segment,
    Patch,
    Pretrain,
    Featurize,
    Graph,
    TrainGcn,
    TrainBaseline,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Synth,
        Stage::Segment,
        Stage::Patch,
        Stage::Pretrain,
        Stage::Featurize,
        Stage::Graph,
        Stage::TrainGcn,
        Stage::TrainBaseline,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Segment => "segment",
            Stage::Patch => "patch",
            Stage::Pretrain => "pretrain",
            Stage::Featurize => "featurize",
            Stage::Graph => "graph",
            Stage::TrainGcn => "train-gcn",
            Stage::TrainBaseline => "train-baseline",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

/// Behaviour switches shared by every command.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Skip outputs that already exist with the current config hash.
    pub resume: bool,
    /// Accept inputs stamped with a different config hash.
    pub force: bool,
}

/// Paths of every artifact under the output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.tsv")
    }

    /// Manifest-relative path of slide `i`.
    pub fn slide_rel(i: usize) -> PathBuf {
        PathBuf::from(format!("slides/slide-{i:03}.ppm"))
    }

    pub fn mask(&self, id: &str) -> PathBuf {
        self.root.join("masks").join(format!("{id}.pgm"))
    }

    pub fn patches(&self, id: &str) -> PathBuf {
        self.root.join("patches").join(format!("{id}.sgp"))
    }

    pub fn encoder(&self) -> PathBuf {
        self.root.join("encoder.ckpt")
    }

    pub fn features(&self, tap: Tap, id: &str) -> PathBuf {
        self.root.join("features").join(tap.as_str()).join(format!("{id}.sgf"))
    }

    pub fn graph(&self, tap: Tap, id: &str) -> PathBuf {
        self.root.join("graphs").join(tap.as_str()).join(format!("{id}.sgg"))
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.root.join("models").join(format!("{name}.ckpt"))
    }

    pub fn log(&self, name: &str) -> PathBuf {
        self.root.join("logs").join(format!("{name}.log"))
    }

    pub fn metrics(&self, name: &str) -> PathBuf {
        self.root.join("metrics").join(format!("{name}.txt"))
    }

    pub fn report(&self, file: &str) -> PathBuf {
        self.root.join("report").join(file)
    }
}

/// Model names used for checkpoints, logs and metrics reports.
pub fn gcn_name(tap: Tap) -> String {
    format!("gcn-{tap}")
}

pub const ENSEMBLE: &str = "ensemble";
pub const BASELINE: &str = "baseline";
pub const PRETRAIN: &str = "pretrain";

/// A configured run rooted at `config.paths.out`.
#[derive(Clone, Debug)]
pub struct Pipeline {
    config: RunConfig,
    hash: String,
    layout: Layout,
    options: RunOptions,
}

impl Pipeline {
    pub fn new(config: RunConfig, options: RunOptions) -> Result<Self> {
        config.validate()?;
        let hash = config.hash();
        let layout = Layout::new(&config.paths.out);
        Ok(Self {
            config,
            hash,
            layout,
            options,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Writes the resolved config to the output directory and logs it.
    pub fn record_config(&self) -> Result<()> {
        std::fs::create_dir_all(self.layout.root())?;
        let text = format!("# {HASH_PREFIX}{}\n{}", self.hash, self.config.to_toml());
        log::info!("resolved config (hash {}):\n{}", self.hash, self.config.to_toml());
        std::fs::write(self.layout.config(), text)?;
        Ok(())
    }

    pub fn run_stage(&self, stage: Stage) -> Result<()> {
        log::info!("stage {}", stage.as_str());
        match stage {
            Stage::Synth => self.synth(),
            Stage::Segment => self.segment(),
            Stage::Patch => self.patch(),
            Stage::Pretrain => self.pretrain(),
            Stage::Featurize => self.featurize(),
            Stage::Graph => self.graph(),
            Stage::TrainGcn => self.train_gcn(),
            Stage::TrainBaseline => self.train_baseline(),
            Stage::Evaluate => self.evaluate(),
            Stage::Report => self.report(),
        }
    }

    /// Runs every stage in order.
    pub fn run_all(&self) -> Result<()> {
        self.record_config()?;
        Stage::ALL.into_iter().try_for_each(|s| self.run_stage(s))
    }

    /// Checks an input's hash. Mismatches are fatal when `strict` and not
    /// forced, otherwise logged.
    fn check_hash(&self, path: &Path, found: &str, strict: bool) -> Result<()> {
        if found == self.hash {
            return Ok(());
        }
        if strict && !self.options.force {
            return Err(Error::HashMismatch {
                path: path.display().to_string(),
                expected: self.hash.clone(),
                found: found.to_string(),
            });
        }
        log::warn!(
            "{} was produced by config {found}, current config is {}",
            path.display(),
            self.hash
        );
        Ok(())
    }

    /// True when `--resume` is set and `path` exists with the current hash.
    fn up_to_date(&self, path: &Path, hash_of: impl FnOnce(&Path) -> Result<String>) -> bool {
        self.options.resume && path.exists() && hash_of(path).map(|h| h == self.hash).unwrap_or(false)
    }
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(path.display().to_string()))
    }
}

/// Hash from `config-hash: ...` comment lines.
fn hash_from_comments<'a>(comments: impl IntoIterator<Item = &'a String>) -> Option<String> {
    comments
        .into_iter()
        .find_map(|c| c.strip_prefix(HASH_PREFIX).map(|h| h.trim().to_string()))
}
