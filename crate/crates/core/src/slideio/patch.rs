use super::{RasterImage, TissueMask};
use crate::error::{contract, shape, Result};

/// A square tile cut from a slide on a regular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub pixels: RasterImage,
    pub grid_row: usize,
    pub grid_col: usize,
    /// Tile centre `(x, y)` in source-image pixel coordinates.
    pub centroid: (f64, f64),
    pub tissue_fraction: f64,
}

impl Patch {
    pub fn size(&self) -> usize {
        self.pixels.width()
    }

    /// Centre of grid cell `(row, col)` for tiles of side `size`.
    pub fn centroid_of(row: usize, col: usize, size: usize) -> (f64, f64) {
        let half = size as f64 / 2.0;
        ((col * size) as f64 + half, (row * size) as f64 + half)
    }
}

/// Tiles `image` on a non-overlapping grid with stride `patch_size`.
///
/// Tiles whose tissue fraction is below `min_tissue_fraction` are dropped,
/// as are right/bottom remainders narrower than a tile. Output is ordered by
/// `(grid_row, grid_col)`.
pub fn extract_patches(
    image: &RasterImage,
    mask: &TissueMask,
    patch_size: usize,
    min_tissue_fraction: f64,
) -> Result<Vec<Patch>> {
    if patch_size == 0 {
        return Err(contract("patch_size must be >= 1"));
    }
    if !(0.0..=1.0).contains(&min_tissue_fraction) {
        return Err(contract(format!("min_tissue_fraction {min_tissue_fraction} outside [0, 1]")));
    }
    if mask.width() != image.width() || mask.height() != image.height() {
        return Err(shape(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )));
    }
    let rows = image.height() / patch_size;
    let cols = image.width() / patch_size;
    let area = (patch_size * patch_size) as f64;
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (c * patch_size, r * patch_size);
            let fraction = mask.count_in(x, y, patch_size, patch_size) as f64 / area;
            if fraction < min_tissue_fraction {
                continue;
            }
            out.push(Patch {
                pixels: image.crop(x, y, patch_size, patch_size)?,
                grid_row: r,
                grid_col: c,
                centroid: Patch::centroid_of(r, c, patch_size),
                tissue_fraction: fraction,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_tissue_gives_full_grid() {
        let img = RasterImage::filled(512, 512, [120, 60, 140]);
        let mask = TissueMask::full(512, 512);
        let p = extract_patches(&img, &mask, 256, 0.5).unwrap();
        let grid: Vec<_> = p.iter().map(|p| (p.grid_row, p.grid_col)).collect();
        assert_eq!(grid, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(p[3].centroid, (384.0, 384.0));
        assert!(p.iter().all(|p| p.tissue_fraction == 1.0));
    }

    #[test]
    fn empty_mask_and_small_image_give_nothing() {
        let img = RasterImage::white(64, 64);
        assert!(extract_patches(&img, &TissueMask::empty(64, 64), 32, 0.5).unwrap().is_empty());
        let tiny = RasterImage::white(20, 20);
        assert!(extract_patches(&tiny, &TissueMask::full(20, 20), 32, 0.0).unwrap().is_empty());
    }

    #[test]
    fn bad_arguments() {
        let img = RasterImage::white(8, 8);
        let m = TissueMask::full(8, 8);
        assert!(extract_patches(&img, &m, 0, 0.5).is_err());
        assert!(extract_patches(&img, &m, 4, 1.5).is_err());
        assert!(extract_patches(&img, &TissueMask::full(4, 8), 4, 0.5).is_err());
    }
}
