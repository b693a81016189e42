//! Renders one synthetic slide per class and writes them as PPM files.
//!
//! Usage: `synthetic_slides [OUT_DIR]` (defaults to the system temp dir).

use std::path::PathBuf;

use slidegraph::slideio::pnm::write_ppm;
use slidegraph::slideio::{derive_seed, generate_synthetic_slide, mean_blue_ratio, SyntheticSlideSpec};

fn main() -> slidegraph::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    for class in 0..3 {
        let spec = SyntheticSlideSpec::new(class, derive_seed(7, class as u64));
        let (slide, label) = generate_synthetic_slide(&spec)?;
        let path = out.join(format!("synthetic-class{label}.ppm"));
        write_ppm(&path, &slide, &[format!("label: {label}")])?;
        println!(
            "class {label}: {}x{}, mean blue ratio {:.2}, {} nuclei/kpx expected -> {}",
            slide.width(),
            slide.height(),
            mean_blue_ratio(&slide),
            spec.texture.nuclei_per_kpx,
            path.display()
        );
    }
    Ok(())
}
