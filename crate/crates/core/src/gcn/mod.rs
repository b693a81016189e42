//! Graph classifier: GCN or basic message-passing layers, mean pooling over
//! nodes, an MLP head and softmax.

mod ensemble;
mod layers;
mod model;
mod train;

pub use ensemble::{argmax, ensemble_predict};
pub use layers::{aggregate, basic_gnn_layer, gcn_layer};
pub use model::{softmax_probs, GcnConfig, GcnModel, LayerKind};
pub use train::{train, TrainConfig, TrainOutcome};
