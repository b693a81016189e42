//! Slides as rasters: synthesis, PPM I/O, tissue segmentation, tiling and
//! the blue-ratio transform.

mod blue_ratio;
mod manifest;
mod patch;
mod patchset;
pub mod pnm;
mod raster;
mod rng;
mod segment;
mod synth;

pub use blue_ratio::{blue_ratio, blue_ratio_pixel, mean_blue_ratio, BlueRatioMap};
pub use manifest::{Manifest, ManifestEntry, Split};
pub use patch::{extract_patches, Patch};
pub use patchset::{PatchSet, PATCH_SET_VERSION};
pub use raster::RasterImage;
pub use rng::{derive_seed, seeded_rng, SlideRng};
pub use segment::{mask_to_white, segment_tissue, SegmentParams, TissueMask};
pub use synth::{generate_synthetic_slide, ClassTexture, SyntheticSlideSpec};
