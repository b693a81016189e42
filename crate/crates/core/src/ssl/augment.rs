use rand::Rng;

use crate::error::{contract, Result};
use crate::slideio::RasterImage;

/// Random view generation for contrastive pretraining.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentationParams {
    pub p_hflip: f64,
    pub p_vflip: f64,
    /// Multiplicative contrast factor drawn uniformly from `[lo, hi]`.
    pub contrast: (f64, f64),
    pub p_blur: f64,
    /// Gaussian sigma drawn uniformly from `[lo, hi]` when blurring.
    pub blur_sigma: (f64, f64),
}

impl Default for AugmentationParams {
    fn default() -> Self {
        Self {
            p_hflip: 0.5,
            p_vflip: 0.5,
            contrast: (0.8, 1.2),
            p_blur: 0.5,
            blur_sigma: (0.1, 2.0),
        }
    }
}

impl AugmentationParams {
    /// No randomness at all: `augment` becomes the identity.
    pub fn identity() -> Self {
        Self {
            p_hflip: 0.0,
            p_vflip: 0.0,
            contrast: (1.0, 1.0),
            p_blur: 0.0,
            blur_sigma: (0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_hflip) || !prob(self.p_vflip) || !prob(self.p_blur) {
            return Err(contract(format!("augmentation probabilities must be in [0, 1]: {self:?}")));
        }
        if !(self.contrast.0 <= self.contrast.1) || self.contrast.0 < 0.0 {
            return Err(contract(format!("bad contrast range {:?}", self.contrast)));
        }
        if !(self.blur_sigma.0 <= self.blur_sigma.1) || self.blur_sigma.0 < 0.0 {
            return Err(contract(format!("bad blur sigma range {:?}", self.blur_sigma)));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

/// Applies, in this order: horizontal flip, vertical flip, contrast scaling
/// about the image mean (clamped to `[0, 255]`), Gaussian blur with
/// reflect-101 padding.
///
/// Exactly five uniforms are drawn per call whatever the outcome, so the
/// stream position after a call does not depend on which branches fired.
pub fn augment<R: Rng + ?Sized>(image: &RasterImage, params: &AugmentationParams, rng: &mut R) -> RasterImage {
    let u_h: f64 = rng.random();
    let u_v: f64 = rng.random();
    let factor = uniform(rng, params.contrast);
    let u_b: f64 = rng.random();
    let sigma = uniform(rng, params.blur_sigma);

    let mut out = image.clone();
    if u_h < params.p_hflip {
        out = out.flip_horizontal();
    }
    if u_v < params.p_vflip {
        out = out.flip_vertical();
    }
    let mut values: Vec<f64> = out.samples().iter().map(|&s| s as f64).collect();
    let mut touched = false;
    if factor != 1.0 && !values.is_empty() {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v = (mean + factor * (*v - mean)).clamp(0.0, 255.0);
        }
        touched = true;
    }
    if u_b < params.p_blur && sigma > 1e-3 {
        values = gaussian_blur(&values, out.width(), out.height(), sigma);
        touched = true;
    }
    if touched {
        for (s, v) in out.samples_mut().iter_mut().zip(&values) {
            *s = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Reflect-101 index folding (`-1 → 1`, `n → n-2`).
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    (if m >= n as isize { period - m } else { m }) as usize
}

fn gaussian_blur(values: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let idx = |x: usize, y: usize, c: usize| (y * w + x) * 3 + c;
    let mut tmp = vec![0.0; values.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                tmp[idx(x, y, c)] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, kv)| kv * values[idx(reflect(x as isize + k as isize - radius, w), y, c)])
                    .sum();
            }
        }
    }
    let mut out = vec![0.0; values.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                out[idx(x, y, c)] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, kv)| kv * tmp[idx(x, reflect(y as isize + k as isize - radius, h), c)])
                    .sum();
            }
        }
    }
    out
}
