//! Contrastive pretraining of the patch encoder and feature extraction.

mod augment;
mod encoder;
mod features;
mod loss;
mod pretrain;
mod queue;

pub use augment::{augment, AugmentationParams};
pub use encoder::{batch_input, Encoder, EncoderConfig, EncoderOutputs, Tap};
pub use features::{extract_features, featurize_patches, FeatureRecord, FeatureStore, FEATURE_STORE_VERSION};
pub use loss::{info_nce, info_nce_batch};
pub use pretrain::{channel_mean, momentum_update, pretrain, PretrainConfig, PretrainOutcome, Pretrainer};
pub use queue::FeatureQueue;
