//! Segmentation and tiling against pixel-count oracles, the synthetic
//! class signal, and tile-bag selection against a sort oracle.

mod common;

use common::{random_patch, select_tiles_oracle};
use proptest::prelude::*;
use slidegraph::mil::{concat_bag, mosaic_cells, select_tiles};
use slidegraph::slideio::{
    derive_seed, extract_patches, generate_synthetic_slide, mean_blue_ratio, seeded_rng, segment_tissue, RasterImage,
    SegmentParams, SyntheticSlideSpec,
};

const STAIN: [u8; 3] = [120, 60, 140];

#[test]
fn left_half_stained_gives_exactly_the_left_half() {
    let mut img = RasterImage::white(512, 512);
    for y in 0..512 {
        for x in 0..256 {
            img.set_pixel(x, y, STAIN);
        }
    }
    let mask = segment_tissue(&img, &SegmentParams::default());
    let mut count = 0;
    for y in 0..512 {
        for x in 0..512 {
            assert_eq!(mask.is_tissue(x, y), x < 256, "({x}, {y})");
            count += usize::from(x < 256);
        }
    }
    assert_eq!(mask.tissue_pixels(), count);
}

#[test]
fn tiles_over_partial_tissue_match_a_count_oracle() {
    let mut img = RasterImage::white(768, 512);
    for y in 0..512 {
        for x in 0..512 {
            img.set_pixel(x, y, STAIN);
        }
    }
    let mask = segment_tissue(&img, &SegmentParams::default());
    let patches = extract_patches(&img, &mask, 256, 0.5).unwrap();
    let want: Vec<(usize, usize)> = (0..2)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .filter(|&(r, c)| {
            let tissue = (0..256)
                .flat_map(|dy| (0..256).map(move |dx| (c * 256 + dx, r * 256 + dy)))
                .filter(|&(x, _)| x < 512)
                .count();
            tissue as f64 / 65536.0 >= 0.5
        })
        .collect();
    let got: Vec<(usize, usize)> = patches.iter().map(|p| (p.grid_row, p.grid_col)).collect();
    assert_eq!(got, want);
    assert_eq!(got.len(), 4);
}

#[test]
fn class_two_is_bluer_than_class_zero() {
    let sample = |class: usize| -> Vec<f64> {
        (0..100u64)
            .map(|i| {
                let spec = SyntheticSlideSpec::new(class, derive_seed(1000 + class as u64, i));
                mean_blue_ratio(&generate_synthetic_slide(&spec).unwrap().0)
            })
            .collect()
    };
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let ((m0, se0), (m2, se2)) = (stats(&sample(0)), stats(&sample(2)));
    assert!(m2 - m0 > 3.0 * (se0 + se2).sqrt(), "class 0 {m0:.3}, class 2 {m2:.3}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn select_tiles_matches_sort_oracle(seed in any::<u64>(), n in 0usize..60, bag in prop::sample::select(vec![4usize, 9, 36])) {
        let mut rng = seeded_rng(seed);
        let patches: Vec<_> = (0..n).map(|i| random_patch(&mut rng, 8, i / 10, i % 10)).collect();
        let selected = select_tiles(&patches, bag, 8, "s", 0).unwrap();
        let order = select_tiles_oracle(&patches, bag);
        prop_assert_eq!(selected.real_tiles, order.len());
        prop_assert_eq!(selected.tiles.len(), bag);
        for (tile, (r, c)) in selected.tiles.iter().zip(&order) {
            let src = patches.iter().find(|p| (p.grid_row, p.grid_col) == (*r, *c)).unwrap();
            prop_assert_eq!(tile, &src.pixels);
        }
        for pad in &selected.tiles[order.len()..] {
            prop_assert_eq!(pad, &RasterImage::white(8, 8));
        }
    }

    #[test]
    fn mosaic_pixels_come_from_the_right_tile(seed in any::<u64>(), side in 1usize..5, p in 1usize..6) {
        let mut rng = seeded_rng(seed);
        let patches: Vec<_> = (0..side * side).map(|i| random_patch(&mut rng, p, i, 0)).collect();
        let bag = select_tiles(&patches, side * side, p, "s", 0).unwrap();
        let mosaic = concat_bag(&bag).unwrap();
        prop_assert_eq!((mosaic.width(), mosaic.height()), (side * p, side * p));
        for y in 0..side * p {
            for x in 0..side * p {
                let tile = &bag.tiles[(y / p) * side + x / p];
                prop_assert_eq!(mosaic.pixel(x, y), tile.pixel(x % p, y % p));
            }
        }
        prop_assert_eq!(mosaic_cells(&mosaic, side).unwrap(), bag.tiles);
    }
}

#[test]
fn forty_patches_keep_the_36_bluest() {
    let mut rng = seeded_rng(40);
    let patches: Vec<_> = (0..40).map(|i| random_patch(&mut rng, 8, i / 8, i % 8)).collect();
    let bag = select_tiles(&patches, 36, 8, "s", 1).unwrap();
    assert_eq!(bag.real_tiles, 36);
    let kept: Vec<f64> = bag.tiles.iter().map(mean_blue_ratio).collect();
    let dropped_max = patches
        .iter()
        .filter(|p| !bag.tiles.contains(&p.pixels))
        .map(|p| mean_blue_ratio(&p.pixels))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(kept.windows(2).all(|w| w[0] >= w[1]));
    assert!(kept.iter().all(|&k| k >= dropped_max));
}
