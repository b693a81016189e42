//! Kappa against a direct-formula oracle, confusion marginals and the
//! Gleason-to-ISUP table.

mod common;

use common::kappa_oracle;
use proptest::prelude::*;
use slidegraph::metrics::{
    confusion, isup_from_gleason, kappa_from_confusion, kappa_weights, quadratic_weighted_kappa, GleasonPair,
};

fn labels(n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..=100).prop_flat_map(move |len| (prop::collection::vec(0..n, len), prop::collection::vec(0..n, len)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kappa_matches_oracle((a, p) in labels(6)) {
        let got = quadratic_weighted_kappa(&a, &p, 6).unwrap();
        prop_assert!((got - kappa_oracle(&a, &p, 6)).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_invariant_to_weight_scale((a, p) in labels(6), scale in 1e-3f64..1e3) {
        let cm = confusion(&a, &p, 6).unwrap();
        let w = kappa_weights(6);
        let scaled: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let k1 = kappa_from_confusion(&cm, &w).unwrap();
        let k2 = kappa_from_confusion(&cm, &scaled).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn perfect_agreement_is_exactly_one(a in prop::collection::vec(0usize..6, 1..100)) {
        prop_assert_eq!(quadratic_weighted_kappa(&a, &a, 6).unwrap(), 1.0);
    }

    #[test]
    fn confusion_marginals_are_histograms((a, p) in labels(5)) {
        let cm = confusion(&a, &p, 5).unwrap();
        let hist = |v: &[usize]| (0..5).map(|c| v.iter().filter(|&&x| x == c).count() as u64).collect::<Vec<_>>();
        prop_assert_eq!(cm.row_sums(), hist(&a));
        prop_assert_eq!(cm.col_sums(), hist(&p));
        prop_assert_eq!(cm.total(), a.len() as u64);
    }
}

#[test]
fn isup_table_rows() {
    let cases = [
        ((3, 3), 1),
        ((2, 3), 1),
        ((3, 4), 2),
        ((4, 3), 3),
        ((4, 4), 4),
        ((3, 5), 4),
        ((5, 3), 4),
        ((4, 5), 5),
        ((5, 4), 5),
        ((5, 5), 5),
    ];
    for ((p, s), grade) in cases {
        assert_eq!(isup_from_gleason(GleasonPair::new(p, s).unwrap()).unwrap(), grade, "{p}+{s}");
    }
}
