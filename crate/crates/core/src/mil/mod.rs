//! Blue-ratio tile-bag baseline: pick the most hematoxylin-rich tiles,
//! tile them into a square mosaic and classify per-cell colour statistics.

mod bag;
mod baseline;

pub use bag::{concat_bag, mosaic_cells, select_tiles, TileBag, DEFAULT_BAG_SIZE};
pub use baseline::{bag_features, train_baseline, BaselineConfig, BaselineModel, BaselineOutcome, CELL_FEATURES};
