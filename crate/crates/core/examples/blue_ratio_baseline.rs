//! Blue-ratio tile ranking and the tile-bag baseline classifier.

use slidegraph::gcn::{argmax, TrainConfig};
use slidegraph::metrics::quadratic_weighted_kappa;
use slidegraph::mil::{concat_bag, select_tiles, train_baseline, BaselineConfig, TileBag};
use slidegraph::slideio::{
    blue_ratio_pixel, derive_seed, extract_patches, generate_synthetic_slide, segment_tissue, SegmentParams,
    SyntheticSlideSpec,
};

fn main() -> slidegraph::Result<()> {
    for rgb in [[0, 0, 255], [255, 255, 255], [0, 0, 0]] {
        println!("blue ratio of {rgb:?} = {:.4}", blue_ratio_pixel(rgb));
    }

    let mut bags = Vec::new();
    for i in 0..45u64 {
        let label = (i % 3) as usize;
        let (slide, _) = generate_synthetic_slide(&SyntheticSlideSpec::new(label, derive_seed(13, i)))?;
        let mask = segment_tissue(&slide, &SegmentParams::default());
        let patches = extract_patches(&slide, &mask, 32, 0.5)?;
        bags.push(select_tiles(&patches, 16, 32, &format!("s{i}"), label)?);
    }
    let mosaic = concat_bag(&bags[0])?;
    println!("bag mosaic {}x{} with {} real tiles", mosaic.width(), mosaic.height(), bags[0].real_tiles);

    let (train, test) = bags.split_at(30);
    let refs: Vec<&TileBag> = train.iter().collect();
    let config = BaselineConfig {
        bag_size: 16,
        ..BaselineConfig::new(3)
    };
    let outcome = train_baseline(&refs, config, &TrainConfig { lr: 1e-3, ..TrainConfig::default() })?;
    let actual: Vec<usize> = test.iter().map(|b| b.label).collect();
    let predicted = test
        .iter()
        .map(|b| Ok(argmax(&outcome.model.predict(b)?)))
        .collect::<slidegraph::Result<Vec<_>>>()?;
    println!("baseline held-out kappa {:.3}", quadratic_weighted_kappa(&actual, &predicted, 3)?);
    Ok(())
}
