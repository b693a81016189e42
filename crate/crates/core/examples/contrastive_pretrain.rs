//! Momentum-contrast pretraining of the patch encoder on a handful of
//! synthetic slides, then a look at the two feature taps.

use slidegraph::slideio::{
    derive_seed, extract_patches, generate_synthetic_slide, segment_tissue, RasterImage, SegmentParams,
    SyntheticSlideSpec,
};
use slidegraph::ssl::{pretrain, AugmentationParams, EncoderConfig, PretrainConfig, Tap};

fn main() -> slidegraph::Result<()> {
    let mut tiles = Vec::new();
    for i in 0..6 {
        let (slide, _) = generate_synthetic_slide(&SyntheticSlideSpec::new(i % 3, derive_seed(5, i as u64)))?;
        let mask = segment_tissue(&slide, &SegmentParams::default());
        tiles.extend(extract_patches(&slide, &mask, 32, 0.5)?.into_iter().map(|p| p.pixels));
    }
    let images: Vec<&RasterImage> = tiles.iter().collect();
    let config = PretrainConfig {
        epochs: 6,
        max_patches: Some(256),
        ..PretrainConfig::default()
    };
    let outcome = pretrain(&images, EncoderConfig::default(), AugmentationParams::default(), config, 1)?;
    println!("{} patches available, {} used, {} steps", images.len(), outcome.patches_used, outcome.steps);
    for r in &outcome.history {
        println!("epoch {:>2}  InfoNCE {:.4}  lr {:.2e}", r.epoch, r.mean_loss, r.lr);
    }
    for tap in Tap::ALL {
        let f = outcome.encoder.features(&images[..4], tap)?;
        println!("{tap} tap: {} features per patch", f.cols());
    }
    Ok(())
}
