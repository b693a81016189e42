//! The whole pipeline on a reduced corpus, driven through the same entry
//! point as the CLI.
//!
//! Usage: `end_to_end [OUT_DIR]`.

use std::path::PathBuf;

use slidegraph::pipeline::{Pipeline, RunConfig, RunOptions, Stage};

fn main() -> slidegraph::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("slidegraph-end-to-end"));
    let mut config = RunConfig::default();
    config.data.slides = 45;
    config.pretrain.epochs = 5;
    config.pretrain.max_patches = 512;
    config.paths.out = out.clone();

    let pipeline = Pipeline::new(config, RunOptions::default())?;
    pipeline.record_config()?;
    for stage in Stage::ALL {
        let start = std::time::Instant::now();
        pipeline.run_stage(stage)?;
        println!("{:<15} {:>6.1}s", stage.as_str(), start.elapsed().as_secs_f64());
    }
    println!("\n{}", std::fs::read_to_string(pipeline.layout().report("kappa.csv"))?);
    println!("artifacts in {}", out.display());
    Ok(())
}
