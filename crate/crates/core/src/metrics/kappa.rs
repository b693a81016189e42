use crate::error::{contract, shape, Result};

/// `counts[i][j]` = number of samples with actual class `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub n: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.counts[i][i]).sum()
    }
}

fn check(actual: &[usize], predicted: &[usize], n: usize) -> Result<()> {
    if n < 2 {
        return Err(contract(format!("need at least 2 classes, got {n}")));
    }
    if actual.len() != predicted.len() {
        return Err(shape(format!(
            "{} actual labels but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(contract("no labels to score"));
    }
    if let Some(&bad) = actual.iter().chain(predicted).find(|&&l| l >= n) {
        return Err(contract(format!("label {bad} out of range for {n} classes")));
    }
    Ok(())
}

pub fn confusion(actual: &[usize], predicted: &[usize], n: usize) -> Result<ConfusionMatrix> {
    check(actual, predicted, n)?;
    let mut counts = vec![vec![0u64; n]; n];
    for (&a, &p) in actual.iter().zip(predicted) {
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix { n, counts })
}

/// `w[i][j] = (i − j)² / (N − 1)`.
pub fn kappa_weights(n: usize) -> Vec<Vec<f64>> {
    let denom = n.saturating_sub(1).max(1) as f64;
    (0..n)
        .map(|i| (0..n).map(|j| ((i as f64 - j as f64).powi(2)) / denom).collect())
        .collect()
}

/// `κ = 1 − Σ w·O / Σ w·E` with `E` the outer product of the marginals
/// scaled to the same total as `O`. Returns 1 when `Σ w·E = 0`.
pub fn kappa_from_confusion(cm: &ConfusionMatrix, weights: &[Vec<f64>]) -> Result<f64> {
    let n = cm.n;
    if weights.len() != n || weights.iter().any(|r| r.len() != n) {
        return Err(shape(format!("weight matrix must be {n}x{n}")));
    }
    let total = cm.total() as f64;
    if total == 0.0 {
        return Err(contract("empty confusion matrix"));
    }
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for i in 0..n {
        for j in 0..n {
            observed += weights[i][j] * cm.counts[i][j] as f64;
            expected += weights[i][j] * (rows[i] as f64 * cols[j] as f64 / total);
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - observed / expected)
}

pub fn quadratic_weighted_kappa(actual: &[usize], predicted: &[usize], n: usize) -> Result<f64> {
    kappa_from_confusion(&confusion(actual, predicted, n)?, &kappa_weights(n))
}

pub fn accuracy(actual: &[usize], predicted: &[usize]) -> Result<f64> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(shape(format!(
            "accuracy needs equal nonempty label lists, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let hits = actual.iter().zip(predicted).filter(|(a, p)| a == p).count();
    Ok(hits as f64 / actual.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted() {
        assert_eq!(quadratic_weighted_kappa(&[0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap(), 1.0);
        assert_eq!(quadratic_weighted_kappa(&[0, 0, 1, 1], &[1, 1, 0, 0], 2).unwrap(), -1.0);
    }

    #[test]
    fn degenerate_constant_labels() {
        assert_eq!(quadratic_weighted_kappa(&[1, 1, 1], &[1, 1, 1], 4).unwrap(), 1.0);
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[2], &[3], 6).unwrap();
        assert_eq!(cm.counts[2][3], 1);
        assert_eq!(cm.total(), 1);
        let cm = confusion(&[1; 5], &[1; 5], 6).unwrap();
        assert_eq!(cm.counts[1][1], 5);
        assert_eq!(cm.trace(), 5);
    }

    #[test]
    fn weights_shape() {
        let w = kappa_weights(6);
        assert_eq!(w[0][5], 5.0);
        assert_eq!(w[2][2], 0.0);
        assert_eq!(w[1][3], w[3][1]);
    }

    #[test]
    fn bad_inputs() {
        assert!(quadratic_weighted_kappa(&[0, 1], &[0], 2).is_err());
        assert!(quadratic_weighted_kappa(&[0, 2], &[0, 1], 2).is_err());
        assert!(quadratic_weighted_kappa(&[], &[], 2).is_err());
        assert!(quadratic_weighted_kappa(&[0], &[0], 1).is_err());
    }
}
