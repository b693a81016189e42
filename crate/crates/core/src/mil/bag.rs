use crate::error::{contract, Result};
use crate::slideio::{mean_blue_ratio, Patch, RasterImage};

pub const DEFAULT_BAG_SIZE: usize = 36;

/// Exactly `tiles.len()` tiles, real tiles first in ranked order, then
/// white padding.
#[derive(Clone, Debug, PartialEq)]
pub struct TileBag {
    pub tiles: Vec<RasterImage>,
    pub slide_id: String,
    pub label: usize,
    /// Number of leading tiles taken from the slide.
    pub real_tiles: usize,
}

/// Ranks patches by mean blue ratio (descending, ties by grid position),
/// keeps the first `bag_size` and pads with white `patch_size` tiles.
pub fn select_tiles(
    patches: &[Patch],
    bag_size: usize,
    patch_size: usize,
    slide_id: &str,
    label: usize,
) -> Result<TileBag> {
    if bag_size == 0 || patch_size == 0 {
        return Err(contract("bag size and patch size must be positive"));
    }
    if let Some(p) = patches.iter().find(|p| p.size() != patch_size || p.pixels.height() != patch_size) {
        return Err(contract(format!(
            "patch ({}, {}) is not {patch_size}x{patch_size}",
            p.grid_row, p.grid_col
        )));
    }
    if patches.is_empty() {
        log::warn!("slide {slide_id} has no tissue patches; its bag is all padding");
    }
    let mut ranked: Vec<(f64, usize, usize, usize)> = patches
        .iter()
        .enumerate()
        .map(|(i, p)| (mean_blue_ratio(&p.pixels), p.grid_row, p.grid_col, i))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut tiles: Vec<RasterImage> = ranked
        .iter()
        .take(bag_size)
        .map(|&(_, _, _, i)| patches[i].pixels.clone())
        .collect();
    let real_tiles = tiles.len();
    tiles.resize(bag_size, RasterImage::white(patch_size, patch_size));
    Ok(TileBag {
        tiles,
        slide_id: slide_id.to_string(),
        label,
        real_tiles,
    })
}

fn grid_side(b: usize) -> Result<usize> {
    let side = (b as f64).sqrt().round() as usize;
    if side * side != b || b == 0 {
        return Err(contract(format!("bag size {b} is not a perfect square")));
    }
    Ok(side)
}

/// Row-major square mosaic: tile `i` goes to cell `(i / side, i % side)`.
pub fn concat_bag(bag: &TileBag) -> Result<RasterImage> {
    let side = grid_side(bag.tiles.len())?;
    let p = bag.tiles[0].width();
    let mut out = RasterImage::white(side * p, side * p);
    for (i, tile) in bag.tiles.iter().enumerate() {
        if tile.width() != p || tile.height() != p {
            return Err(contract("bag tiles differ in size"));
        }
        out.paste(tile, (i % side) * p, (i / side) * p)?;
    }
    Ok(out)
}

/// Splits a mosaic back into its `side × side` cells in row-major order.
pub fn mosaic_cells(mosaic: &RasterImage, side: usize) -> Result<Vec<RasterImage>> {
    if side == 0 || mosaic.width() != mosaic.height() || mosaic.width() % side != 0 {
        return Err(contract(format!(
            "{}x{} mosaic does not split into {side}x{side} cells",
            mosaic.width(),
            mosaic.height()
        )));
    }
    let p = mosaic.width() / side;
    (0..side * side)
        .map(|i| mosaic.crop((i % side) * p, (i / side) * p, p, p))
        .collect()
}
