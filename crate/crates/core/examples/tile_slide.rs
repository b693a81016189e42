//! Segments tissue on a synthetic slide and tiles it into patches.

use slidegraph::slideio::{extract_patches, generate_synthetic_slide, segment_tissue, SegmentParams, SyntheticSlideSpec};

fn main() -> slidegraph::Result<()> {
    let (slide, _) = generate_synthetic_slide(&SyntheticSlideSpec::new(1, 3))?;
    let mask = segment_tissue(&slide, &SegmentParams::default());
    let area = (slide.width() * slide.height()) as f64;
    println!("tissue covers {:.1}% of the slide", 100.0 * mask.tissue_pixels() as f64 / area);

    for (size, min_fraction) in [(32, 0.5), (32, 0.9), (16, 0.5)] {
        let patches = extract_patches(&slide, &mask, size, min_fraction)?;
        println!("{size}px tiles with >= {min_fraction} tissue: {} kept", patches.len());
    }

    let patches = extract_patches(&slide, &mask, 32, 0.5)?;
    println!("first tiles (row, col, centroid, tissue fraction):");
    for p in patches.iter().take(5) {
        println!("  ({}, {}) {:?} {:.3}", p.grid_row, p.grid_col, p.centroid, p.tissue_fraction);
    }
    Ok(())
}
