//! Slide graphs: exact k-NN over patch centroids, degree-normalised
//! adjacency and a versioned binary file format.

mod adjacency;
mod graph;
mod knn;

pub use adjacency::{normalize_adjacency, raw_adjacency, Adjacency, NormalizedAdjacency};
pub use graph::{build_slide_graph, WsiGraph, GRAPH_VERSION};
pub use knn::{knn_graph, DEFAULT_K};
