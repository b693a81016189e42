//! Whole-slide-image grading on a desk.
//!
//! The crate implements a two-stage pipeline:
//!
//! 1. **Patch representation learning.** Slides are tiled into fixed-size
//!    patches after a luminance-threshold tissue segmentation. A patch
//!    encoder is pretrained with a momentum-contrast objective (InfoNCE
//!    against a FIFO queue of keys produced by an EMA copy of the encoder).
//! 2. **Slide classification.** Each slide becomes a graph whose nodes are
//!    patch centroids joined by exact k-nearest-neighbour edges, with node
//!    features read from two layers of the encoder. Stacked GCN layers,
//!    global average pooling and an MLP head grade the slide; the two
//!    feature variants are ensembled by averaging probabilities.
//!
//! A blue-ratio tile-bag baseline and quadratic weighted kappa evaluation
//! complete the picture. Everything runs on a small dense tensor library
//! with tape-based reverse-mode differentiation ([`tensor`]).
//!
//! The [`pipeline`] module drives the stages from a TOML configuration and
//! backs the `slidegraph` binary. Runnable walkthroughs of each stage live
//! in the crate's `examples/` directory:
//!
//! ```text
//! cargo run --release -p slidegraph --example gradient_check
//! cargo run --release -p slidegraph --example synthetic_slides
//! cargo run --release -p slidegraph --example tile_slide
//! cargo run --release -p slidegraph --example contrastive_pretrain
//! cargo run --release -p slidegraph --example slide_graph
//! cargo run --release -p slidegraph --example train_gcn
//! cargo run --release -p slidegraph --example kappa_and_isup
//! cargo run --release -p slidegraph --example blue_ratio_baseline
//! cargo run --release -p slidegraph --example end_to_end
//! ```

mod binio;
pub mod error;
pub mod gcn;
pub mod metrics;
pub mod mil;
pub mod nn;
pub mod pipeline;
pub mod slideio;
pub mod ssl;
pub mod tensor;
pub mod wsigraph;

pub use error::{Error, Result};
