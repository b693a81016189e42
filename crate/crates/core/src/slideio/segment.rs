use std::collections::VecDeque;

use super::raster::luminance;
use super::RasterImage;
use crate::error::{shape, Result};

/// Luminance thresholding followed by small-component removal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentParams {
    /// Fraction of full scale (0..=1); darker pixels are tissue.
    pub luminance_threshold: f64,
    /// 4-connected tissue regions with fewer pixels are dropped.
    pub min_region_px: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            luminance_threshold: 0.85,
            min_region_px: 64,
        }
    }
}

/// Per-pixel tissue flags for an image of the same size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TissueMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl TissueMask {
    pub fn from_flags(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != width * height {
            return Err(shape(format!("{width}x{height} mask needs {} flags", width * height)));
        }
        Ok(Self { width, height, flags })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            flags: vec![true; width * height],
        }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            flags: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_tissue(&self, x: usize, y: usize) -> bool {
        self.flags[y * self.width + x]
    }

    pub fn tissue_pixels(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Tissue pixels inside the `w × h` rectangle at `(x, y)`.
    pub fn count_in(&self, x: usize, y: usize, w: usize, h: usize) -> usize {
        (y..y + h)
            .map(|row| self.flags[row * self.width + x..row * self.width + x + w].iter().filter(|&&f| f).count())
            .sum()
    }
}

/// Marks pixels darker than the threshold as tissue, then removes
/// 4-connected regions smaller than `min_region_px`.
pub fn segment_tissue(image: &RasterImage, params: &SegmentParams) -> TissueMask {
    let (w, h) = (image.width(), image.height());
    let cutoff = params.luminance_threshold * 255.0;
    let mut flags: Vec<bool> = image.pixels().map(|p| luminance(p) < cutoff).collect();

    if params.min_region_px > 1 {
        let mut seen = vec![false; w * h];
        let mut queue = VecDeque::new();
        let mut region = Vec::new();
        for start in 0..w * h {
            if !flags[start] || seen[start] {
                continue;
            }
            region.clear();
            seen[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                region.push(i);
                let (x, y) = (i % w, i / w);
                let mut visit = |j: usize| {
                    if flags[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    visit(i - 1);
                }
                if x + 1 < w {
                    visit(i + 1);
                }
                if y > 0 {
                    visit(i - w);
                }
                if y + 1 < h {
                    visit(i + w);
                }
            }
            if region.len() < params.min_region_px {
                for &i in &region {
                    flags[i] = false;
                }
            }
        }
    }
    TissueMask {
        width: w,
        height: h,
        flags,
    }
}

/// Copy of `image` with every non-tissue pixel painted white.
pub fn mask_to_white(image: &RasterImage, mask: &TissueMask) -> Result<RasterImage> {
    if image.width() != mask.width || image.height() != mask.height {
        return Err(shape("mask and image dimensions differ"));
    }
    let mut out = image.clone();
    for (px, &t) in out.samples_mut().chunks_exact_mut(3).zip(&mask.flags) {
        if !t {
            px.copy_from_slice(&[255, 255, 255]);
        }
    }
    Ok(out)
}
