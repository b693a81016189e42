//! Central finite-difference checks of tape gradients.

use super::{Tape, Tensor, Var};
use crate::error::{contract, Result};

/// Worst disagreement between analytic and numeric gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    /// Max over inputs of `‖g_tape − g_fd‖₂ / max(‖g_tape‖₂, ‖g_fd‖₂, 1e-8)`.
    pub max_rel_error: f64,
    /// Max absolute elementwise difference.
    pub max_abs_error: f64,
}

/// Differentiates `build` with respect to every tensor in `inputs`.
///
/// `build` receives fresh trainable leaves for `inputs` and returns any
/// output; non-scalar outputs are reduced to `Σ out ⊙ probe`, where `probe`
/// is a fixed tensor whose entries vary, so every output element matters.
pub fn check_gradients<F>(inputs: &[Tensor], eps: f64, build: F) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if inputs.is_empty() || !(eps > 0.0) {
        return Err(contract("gradient check needs inputs and a positive step"));
    }
    let scalar = |tape: &mut Tape, xs: &[Tensor]| -> Result<(Var, Vec<Var>)> {
        let vars: Vec<Var> = xs.iter().map(|x| tape.param(x.clone())).collect();
        let out = build(tape, &vars)?;
        if tape.value(out).len() == 1 {
            return Ok((out, vars));
        }
        let shape = tape.value(out).shape().to_vec();
        let n = tape.value(out).len();
        let probe = Tensor::new(shape, (0..n).map(|i| 0.5 + ((i * 7919) % 13) as f64 / 13.0).collect())?;
        let p = tape.constant(probe);
        let prod = tape.mul(out, p)?;
        Ok((tape.sum(prod, None)?, vars))
    };
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let (out, _) = scalar(&mut tape, xs)?;
        Ok(tape.value(out).item())
    };

    let mut tape = Tape::new();
    let (loss, vars) = scalar(&mut tape, inputs)?;
    let analytic = tape.backward(loss)?.collect(&vars);

    let mut report = GradCheck {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
    };
    let mut xs = inputs.to_vec();
    for (i, g) in analytic.iter().enumerate() {
        let mut diff2 = 0.0;
        let mut num2 = 0.0;
        for j in 0..xs[i].len() {
            let orig = xs[i].data()[j];
            xs[i].data_mut()[j] = orig + eps;
            let up = eval(&xs)?;
            xs[i].data_mut()[j] = orig - eps;
            let down = eval(&xs)?;
            xs[i].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let d = g.data()[j] - numeric;
            diff2 += d * d;
            num2 += numeric * numeric;
            report.max_abs_error = report.max_abs_error.max(d.abs());
        }
        let norm_a = g.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = diff2.sqrt() / norm_a.max(num2.sqrt()).max(1e-8);
        report.max_rel_error = report.max_rel_error.max(rel);
    }
    Ok(report)
}
