use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};
use crate::nn::{init_linear, linear, Mlp};
use crate::slideio::{seeded_rng, RasterImage};
use crate::tensor::{linalg, Checkpoint, ParamSet, Tape, Tensor, Var};

/// Shape of the MLP patch encoder.
///
/// Input is a flattened `patch_size × patch_size × 3` patch. The backbone is
/// a ReLU MLP over `hidden`; its last layer is the *large* tap. A further
/// ReLU layer of width `tap_small_dim` is the *small* tap, and a linear
/// projection to `projection_dim` feeds the contrastive loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderConfig {
    pub patch_size: usize,
    pub hidden: Vec<usize>,
    pub tap_small_dim: usize,
    pub tap_large_dim: usize,
    pub projection_dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            patch_size: 32,
            hidden: vec![512, 256],
            tap_small_dim: 64,
            tap_large_dim: 256,
            projection_dim: 64,
        }
    }
}

impl EncoderConfig {
    pub fn input_dim(&self) -> usize {
        self.patch_size * self.patch_size * 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0
            || self.hidden.is_empty()
            || self.hidden.contains(&0)
            || self.tap_small_dim == 0
            || self.projection_dim == 0
        {
            return Err(contract(format!("encoder widths must be positive: {self:?}")));
        }
        if self.hidden.last() != Some(&self.tap_large_dim) {
            return Err(contract(format!(
                "tap_large_dim {} must equal the last hidden width {:?}",
                self.tap_large_dim,
                self.hidden.last()
            )));
        }
        Ok(())
    }

    pub fn tap_dim(&self, tap: Tap) -> usize {
        match tap {
            Tap::Small => self.tap_small_dim,
            Tap::Large => self.tap_large_dim,
        }
    }

    fn backbone(&self) -> Mlp {
        let mut dims = vec![self.input_dim()];
        dims.extend(&self.hidden);
        Mlp::new(dims)
    }

    fn meta(&self) -> Vec<(String, String)> {
        let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("encoder.patch_size".into(), self.patch_size.to_string()),
            ("encoder.hidden".into(), join(&self.hidden)),
            ("encoder.tap_small_dim".into(), self.tap_small_dim.to_string()),
            ("encoder.tap_large_dim".into(), self.tap_large_dim.to_string()),
            ("encoder.projection_dim".into(), self.projection_dim.to_string()),
        ]
    }

    fn from_meta(ck: &Checkpoint) -> Result<Self> {
        let num = |k: &str| -> Result<usize> {
            ck.require_meta(k)?.parse().map_err(|_| Error::Format {
                what: "checkpoint",
                detail: format!("{k} is not an integer"),
            })
        };
        let hidden = ck
            .require_meta("encoder.hidden")?
            .split(',')
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Format {
                what: "checkpoint",
                detail: "encoder.hidden is not an integer list".into(),
            })?;
        Ok(Self {
            patch_size: num("encoder.patch_size")?,
            hidden,
            tap_small_dim: num("encoder.tap_small_dim")?,
            tap_large_dim: num("encoder.tap_large_dim")?,
            projection_dim: num("encoder.projection_dim")?,
        })
    }
}

/// Which encoder layer to read node features from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tap {
    Small,
    Large,
}

impl Tap {
    pub const ALL: [Tap; 2] = [Tap::Small, Tap::Large];

    pub fn as_str(self) -> &'static str {
        match self {
            Tap::Small => "small",
            Tap::Large => "large",
        }
    }
}

impl fmt::Display for Tap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Tap::Small),
            "large" => Ok(Tap::Large),
            other => Err(contract(format!("unknown tap {other:?} (expected small or large)"))),
        }
    }
}

/// Tape handles for the three encoder outputs.
#[derive(Clone, Copy, Debug)]
pub struct EncoderOutputs {
    pub large: Var,
    pub small: Var,
    /// Un-normalised projection head output.
    pub projection: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub params: ParamSet,
    /// Per-channel mean (in `[-1, 1]` units) subtracted from every input
    /// pixel. Set from the pretraining patches.
    pub input_mean: [f64; 3],
}

impl Encoder {
    /// He-initialised encoder.
    pub fn new(config: EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded_rng(seed);
        let mut params = ParamSet::new();
        config.backbone().init(&mut params, "backbone", &mut rng);
        init_linear(&mut params, "small", config.tap_large_dim, config.tap_small_dim, &mut rng);
        init_linear(&mut params, "proj", config.tap_small_dim, config.projection_dim, &mut rng);
        Ok(Self {
            config,
            params,
            input_mean: [0.0; 3],
        })
    }

    /// Runs the encoder on `x` (`[batch, input_dim]`) using `vars`, the
    /// encoder parameters registered on `tape` in [`ParamSet`] order.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], x: Var) -> Result<EncoderOutputs> {
        let backbone = self.config.backbone();
        let nb = backbone.param_count();
        let large = backbone.forward(tape, &vars[..nb], x, true)?;
        let small = linear(tape, large, vars[nb], vars[nb + 1])?;
        let small = tape.relu(small);
        let projection = linear(tape, small, vars[nb + 2], vars[nb + 3])?;
        Ok(EncoderOutputs {
            large,
            small,
            projection,
        })
    }

    /// Untaped forward pass returning `(large, small, projection)` rows.
    fn plain(&self, x: &[f64], rows: usize, stop_at: Option<Tap>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t = self.params.tensors();
        let mut h = x.to_vec();
        let mut width = self.config.input_dim();
        let layers = self.config.hidden.len();
        for i in 0..layers {
            let (w, b) = (&t[2 * i], &t[2 * i + 1]);
            let out = w.cols();
            h = linalg::matmul(&h, w.data(), rows, width, out);
            linalg::add_row_inplace(&mut h, b.data());
            linalg::relu_inplace(&mut h);
            width = out;
        }
        if stop_at == Some(Tap::Large) {
            return (h, Vec::new(), Vec::new());
        }
        let (ws, bs) = (&t[2 * layers], &t[2 * layers + 1]);
        let mut s = linalg::matmul(&h, ws.data(), rows, width, ws.cols());
        linalg::add_row_inplace(&mut s, bs.data());
        linalg::relu_inplace(&mut s);
        if stop_at == Some(Tap::Small) {
            return (h, s, Vec::new());
        }
        let (wp, bp) = (&t[2 * layers + 2], &t[2 * layers + 3]);
        let mut p = linalg::matmul(&s, wp.data(), rows, ws.cols(), wp.cols());
        linalg::add_row_inplace(&mut p, bp.data());
        (h, s, p)
    }

    fn check_input(&self, x: &Tensor) -> Result<usize> {
        let (rows, cols) = x.as_matrix_dims()?;
        if cols != self.config.input_dim() {
            return Err(crate::error::shape(format!(
                "encoder expects {} inputs per row, got {cols}",
                self.config.input_dim()
            )));
        }
        Ok(rows)
    }

    /// L2-normalised projections of the rows of `x`.
    pub fn project(&self, x: &Tensor) -> Result<Tensor> {
        let rows = self.check_input(x)?;
        let (_, _, p) = self.plain(x.data(), rows, None);
        let d = self.config.projection_dim;
        Tensor::new(vec![rows, d], linalg::l2_normalize_rows(&p, d))
    }

    /// Raw tap activations for the rows of `x`.
    pub fn tap_activations(&self, x: &Tensor, tap: Tap) -> Result<Tensor> {
        let rows = self.check_input(x)?;
        let (large, small, _) = self.plain(x.data(), rows, Some(tap));
        let data = match tap {
            Tap::Large => large,
            Tap::Small => small,
        };
        Tensor::new(vec![rows, self.config.tap_dim(tap)], data)
    }

    /// Raw tap activations for a batch of patch images.
    pub fn features(&self, images: &[&RasterImage], tap: Tap) -> Result<Tensor> {
        if images.is_empty() {
            return Err(contract("no images to encode"));
        }
        self.tap_activations(&self.input(images)?, tap)
    }

    /// Encoder input matrix for a batch of patch images.
    pub fn input(&self, images: &[&RasterImage]) -> Result<Tensor> {
        batch_input(images, self.config.patch_size, self.input_mean)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mean: Vec<String> = self.input_mean.iter().map(|m| format!("{m:?}")).collect();
        let mut ck = Checkpoint::new(self.params.clone()).with_meta("kind", "encoder");
        ck.meta.extend(self.config.meta());
        ck.meta.push(("encoder.input_mean".into(), mean.join(",")));
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.meta("kind") != Some("encoder") {
            return Err(Error::Format {
                what: "checkpoint",
                detail: format!("expected an encoder checkpoint, found kind {:?}", ck.meta("kind")),
            });
        }
        let config = EncoderConfig::from_meta(ck)?;
        let reference = Encoder::new(config.clone(), 0)?;
        reference.params.check_compatible(&ck.params)?;
        let mean: Vec<f64> = ck
            .require_meta("encoder.input_mean")?
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format {
                what: "checkpoint",
                detail: "encoder.input_mean is not a float list".into(),
            })?;
        let input_mean: [f64; 3] = mean.try_into().map_err(|_| Error::Format {
            what: "checkpoint",
            detail: "encoder.input_mean needs 3 values".into(),
        })?;
        Ok(Self {
            config,
            params: ck.params.clone(),
            input_mean,
        })
    }
}

/// Stacks patch images into a `[n, P·P·3]` input matrix: samples scaled to
/// `[-1, 1]`, then `mean[c]` subtracted from channel `c`.
pub fn batch_input(images: &[&RasterImage], patch_size: usize, mean: [f64; 3]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(images.len() * patch_size * patch_size * 3);
    for img in images {
        if img.width() != patch_size || img.height() != patch_size {
            return Err(crate::error::shape(format!(
                "encoder expects {patch_size}x{patch_size} patches, got {}x{}",
                img.width(),
                img.height()
            )));
        }
        data.extend(img.to_unit_vector().chunks(3).flat_map(|px| (0..3).map(move |c| px[c] - mean[c])));
    }
    Tensor::new(vec![images.len(), patch_size * patch_size * 3], data)
}
