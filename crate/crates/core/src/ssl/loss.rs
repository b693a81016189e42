use super::FeatureQueue;
use crate::error::{contract, shape, Result};
use crate::tensor::{linalg, Tape, Tensor, Var};

fn check_temperature(tau: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(contract(format!("temperature must be positive, got {tau}")));
    }
    Ok(())
}

/// InfoNCE for one query against its positive key and the queued negatives:
///
/// `−log( exp(q·k⁺/τ) / (exp(q·k⁺/τ) + Σ exp(q·k⁻/τ)) )`
///
/// evaluated with log-sum-exp. Returns the loss and its gradient with
/// respect to `q`.
pub fn info_nce(q: &[f64], k_pos: &[f64], queue: &FeatureQueue, tau: f64) -> Result<(f64, Vec<f64>)> {
    check_temperature(tau)?;
    if q.len() != k_pos.len() || q.len() != queue.dim() {
        return Err(shape(format!(
            "query {}, positive {}, queue dim {}",
            q.len(),
            k_pos.len(),
            queue.dim()
        )));
    }
    let negatives = queue.keys();
    let mut logits = Vec::with_capacity(1 + negatives.len());
    logits.push(linalg::dot(q, k_pos) / tau);
    logits.extend(negatives.iter().map(|k| linalg::dot(q, k) / tau));

    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let loss = max + z.ln() - logits[0];

    // dL/dq = (Σ_i p_i k_i − k⁺) / τ
    let mut grad: Vec<f64> = k_pos.iter().map(|k| (weights[0] / z - 1.0) * k / tau).collect();
    for (k, w) in negatives.iter().zip(&weights[1..]) {
        let p = w / z;
        grad.iter_mut().zip(k.iter()).for_each(|(g, kv)| *g += p * kv / tau);
    }
    Ok((loss, grad))
}

/// Batch InfoNCE on the tape: row `i` of `q` is contrasted against row `i`
/// of `k_pos` and every queued key; the result is the mean over rows.
/// Gradients flow into `q` only.
pub fn info_nce_batch(tape: &mut Tape, q: Var, k_pos: &Tensor, queue: &FeatureQueue, tau: f64) -> Result<Var> {
    check_temperature(tau)?;
    let (rows, dim) = tape.value(q).as_matrix_dims()?;
    if k_pos.shape() != [rows, dim] || dim != queue.dim() {
        return Err(shape(format!(
            "queries {:?}, positives {:?}, queue dim {}",
            tape.value(q).shape(),
            k_pos.shape(),
            queue.dim()
        )));
    }
    let kp = tape.constant(k_pos.clone());
    let prod = tape.mul(q, kp)?;
    let pos = tape.sum(prod, Some(1))?;
    let logits = match queue.to_tensor() {
        Some(keys) => {
            let kt = tape.constant(keys.transpose()?);
            let neg = tape.matmul(q, kt)?;
            tape.concat_cols(&[pos, neg])?
        }
        // No negatives: a constant −∞ column makes every row's loss exactly 0.
        None => {
            let zero = tape.constant(Tensor::full(&[rows, 1], f64::NEG_INFINITY));
            tape.concat_cols(&[pos, zero])?
        }
    };
    let scaled = tape.scale(logits, 1.0 / tau);
    tape.softmax_cross_entropy(scaled, &vec![0; rows])
}
