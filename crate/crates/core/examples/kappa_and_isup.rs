//! Gleason-to-ISUP grading and quadratic weighted kappa on a toy example.

use slidegraph::metrics::{confusion, isup_from_gleason, kappa_from_confusion, kappa_weights, GleasonPair};

fn main() -> slidegraph::Result<()> {
    for (p, s) in [(3, 3), (3, 4), (4, 3), (4, 4), (3, 5), (4, 5), (5, 5)] {
        let g = GleasonPair::new(p, s)?;
        println!("Gleason {p}+{s}={} -> ISUP {}", g.total(), isup_from_gleason(g)?);
    }

    let actual = [0, 1, 2, 3, 4, 0, 1, 2, 3, 4];
    let predicted = [0, 1, 2, 3, 4, 1, 1, 3, 2, 2];
    let cm = confusion(&actual, &predicted, 5)?;
    println!("confusion (rows = actual):");
    for row in &cm.counts {
        println!("  {row:?}");
    }
    let w = kappa_weights(5);
    println!("quadratic weighted kappa {:.4}", kappa_from_confusion(&cm, &w)?);
    let shifted: Vec<usize> = actual.iter().map(|&a| (a + 1).min(4)).collect();
    let off_by_one = confusion(&actual, &shifted, 5)?;
    println!("always one grade high: {:.4}", kappa_from_confusion(&off_by_one, &w)?);
    Ok(())
}
