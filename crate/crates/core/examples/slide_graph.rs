//! Builds the k-NN graph of one slide's patch centroids and shows the
//! symmetric-normalised adjacency used by the GCN layers.

use slidegraph::slideio::{extract_patches, generate_synthetic_slide, segment_tissue, SegmentParams, SyntheticSlideSpec};
use slidegraph::ssl::{Encoder, EncoderConfig, FeatureStore, Tap};
use slidegraph::wsigraph::{build_slide_graph, DEFAULT_K};

fn main() -> slidegraph::Result<()> {
    let (slide, label) = generate_synthetic_slide(&SyntheticSlideSpec::new(2, 9))?;
    let mask = segment_tissue(&slide, &SegmentParams::default());
    let patches = extract_patches(&slide, &mask, 32, 0.5)?;
    // An untrained encoder is enough to show the graph structure.
    let encoder = Encoder::new(EncoderConfig::default(), 0)?;
    let store = FeatureStore::from_patches(&encoder, &patches, Tap::Small, "demo", "none")?;
    let graph = build_slide_graph(&store, DEFAULT_K, label)?;

    let degrees = graph.degrees();
    println!(
        "{} nodes, {} undirected edges, feature dim {}, degree range {}..={}",
        graph.node_count(),
        graph.edges.len(),
        graph.feature_dim(),
        degrees.iter().min().unwrap(),
        degrees.iter().max().unwrap()
    );
    let adj = graph.normalized_adjacency(true)?;
    println!("normalised weights into node 0:");
    for (t, s, w) in adj.entries.iter().filter(|e| e.0 == 0) {
        println!("  {s} -> {t}: {w:.4}");
    }
    Ok(())
}
