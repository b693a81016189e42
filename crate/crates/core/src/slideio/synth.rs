//! Synthetic H&E-like slides.
//!
//! A slide is a near-white background carrying one connected tissue region
//! (a main ellipse plus two overlapping lobes) in an eosin pink. Nuclei are
//! hematoxylin-coloured discs dropped uniformly over the tissue. The class
//! controls nucleus density, size and stain: a higher class draws more and
//! larger, darker-blue nuclei, so the expected stained-pixel density (and the
//! mean blue ratio) increases with the class.
//!
//! Only integer arithmetic and IEEE-exact float operations (+, −, ×, ÷,
//! comparisons) touch pixel values, and all randomness comes from
//! [`seeded_rng`](super::seeded_rng), so a spec regenerates the same bytes on
//! every platform.

use rand::Rng;

use super::{seeded_rng, RasterImage};
use crate::error::{contract, Result};

/// Class-dependent appearance of the nuclei.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTexture {
    /// Expected nuclei per 1000 tissue pixels.
    pub nuclei_per_kpx: f64,
    /// Inclusive nucleus radius range in pixels.
    pub nucleus_radius: (u32, u32),
    /// Mean RGB of a nucleus.
    pub stain_mean: [f64; 3],
    /// Per-nucleus uniform offset applied to each channel, in ±levels.
    pub stain_jitter: f64,
    /// Per-pixel uniform noise in ±levels.
    pub noise_amplitude: u8,
}

impl ClassTexture {
    pub fn for_class(class_id: usize) -> Self {
        let c = class_id as f64;
        Self {
            nuclei_per_kpx: 3.0 + 4.0 * c,
            nucleus_radius: (2, 3 + (class_id as u32).min(4) / 2),
            stain_mean: [
                (110.0 - 12.0 * c).max(30.0),
                (72.0 - 8.0 * c).max(20.0),
                (165.0 - 4.0 * c).max(110.0),
            ],
            stain_jitter: 12.0,
            noise_amplitude: 8,
        }
    }
}

/// Everything needed to regenerate one synthetic slide.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSlideSpec {
    pub class_id: usize,
    pub width: usize,
    pub height: usize,
    pub background: [u8; 3],
    pub tissue_color: [u8; 3],
    pub texture: ClassTexture,
    pub seed: u64,
}

impl SyntheticSlideSpec {
    /// Default 256×256 slide of the given class.
    pub fn new(class_id: usize, seed: u64) -> Self {
        Self {
            class_id,
            width: 256,
            height: 256,
            background: [244, 242, 246],
            tissue_color: [232, 168, 198],
            texture: ClassTexture::for_class(class_id),
            seed,
        }
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }
}

struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let dx = (x - self.cx) / self.rx;
        let dy = (y - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }
}

fn jitter<R: Rng>(rng: &mut R, base: f64, amplitude: i32) -> u8 {
    let n = if amplitude > 0 {
        rng.random_range(-amplitude..=amplitude)
    } else {
        0
    };
    (base + n as f64).round().clamp(0.0, 255.0) as u8
}

/// Renders the slide described by `spec`; returns the image and its label.
pub fn generate_synthetic_slide(spec: &SyntheticSlideSpec) -> Result<(RasterImage, usize)> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(contract(format!("synthetic slide must have positive area, got {w}x{h}")));
    }
    let (rmin, rmax) = spec.texture.nucleus_radius;
    if rmin > rmax || rmin == 0 {
        return Err(contract(format!("invalid nucleus radius range {rmin}..={rmax}")));
    }
    let mut rng = seeded_rng(spec.seed);
    let (wf, hf) = (w as f64, h as f64);

    let main = Ellipse {
        cx: wf * rng.random_range(0.45..0.55),
        cy: hf * rng.random_range(0.45..0.55),
        rx: wf * rng.random_range(0.30..0.42),
        ry: hf * rng.random_range(0.30..0.42),
    };
    let mut shapes = vec![main];
    for _ in 0..2 {
        let lobe = Ellipse {
            cx: shapes[0].cx + wf * rng.random_range(-0.25..0.25),
            cy: shapes[0].cy + hf * rng.random_range(-0.25..0.25),
            rx: wf * rng.random_range(0.15..0.25),
            ry: hf * rng.random_range(0.15..0.25),
        };
        shapes.push(lobe);
    }

    let noise = spec.texture.noise_amplitude as i32;
    let mut tissue = vec![false; w * h];
    let mut img = RasterImage::white(w, h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside = shapes.iter().any(|e| e.contains(px, py));
            tissue[y * w + x] = inside;
            let base = if inside { spec.tissue_color } else { spec.background };
            let amp = if inside { noise } else { noise / 3 };
            let rgb = base.map(|c| jitter(&mut rng, c as f64, amp));
            img.set_pixel(x, y, rgb);
        }
    }

    let attempts = (spec.texture.nuclei_per_kpx * (w * h) as f64 / 1000.0).round() as usize;
    let sj = spec.texture.stain_jitter;
    for _ in 0..attempts {
        let cx = rng.random_range(0..w) as i64;
        let cy = rng.random_range(0..h) as i64;
        let r = rng.random_range(rmin..=rmax) as i64;
        let shift = [
            rng.random_range(-sj..=sj),
            rng.random_range(-sj..=sj),
            rng.random_range(-sj..=sj),
        ];
        if !tissue[cy as usize * w + cx as usize] {
            continue;
        }
        let color = [0, 1, 2].map(|i| spec.texture.stain_mean[i] + shift[i]);
        for y in (cy - r).max(0)..=(cy + r).min(h as i64 - 1) {
            for x in (cx - r).max(0)..=(cx + r).min(w as i64 - 1) {
                let (dx, dy) = (x - cx, y - cy);
                if dx * dx + dy * dy > r * r || !tissue[y as usize * w + x as usize] {
                    continue;
                }
                let rgb = color.map(|c| jitter(&mut rng, c, noise / 2));
                img.set_pixel(x as usize, y as usize, rgb);
            }
        }
    }
    Ok((img, spec.class_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSlideSpec::new(1, 42).with_size(96, 80);
        let (a, la) = generate_synthetic_slide(&spec).unwrap();
        let (b, _) = generate_synthetic_slide(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, 1);
        let other = SyntheticSlideSpec { seed: 43, ..spec };
        assert_ne!(generate_synthetic_slide(&other).unwrap().0, a);
    }

    #[test]
    fn zero_area_is_rejected() {
        let spec = SyntheticSlideSpec::new(0, 1).with_size(0, 10);
        assert!(generate_synthetic_slide(&spec).is_err());
    }

    #[test]
    fn density_grows_with_class() {
        let d: Vec<f64> = (0..6).map(|c| ClassTexture::for_class(c).nuclei_per_kpx).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }
}
