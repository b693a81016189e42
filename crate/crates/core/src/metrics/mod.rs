//! Quadratic weighted kappa, confusion matrices, Gleason→ISUP grading, the
//! metrics report and the per-epoch training log.

mod isup;
mod kappa;
mod log;
mod report;

pub use isup::{isup_from_gleason, GleasonPair};
pub use kappa::{
    accuracy, confusion, kappa_from_confusion, kappa_weights, quadratic_weighted_kappa, ConfusionMatrix,
};
pub use log::{EpochRecord, MetricsLog};
pub use report::{MetricsReport, ReportRow};
