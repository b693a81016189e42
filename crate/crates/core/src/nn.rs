//! Dense layers shared by the encoder, the GCN head and the baseline.

use rand::Rng;

use crate::error::Result;
use crate::tensor::{ParamSet, Tape, Tensor, Var};

/// Pushes a He-initialised `[in, out]` weight and a zero `[1, out]` bias.
pub fn init_linear<R: Rng + ?Sized>(params: &mut ParamSet, prefix: &str, input: usize, output: usize, rng: &mut R) {
    let std = (2.0 / input as f64).sqrt();
    params.push(format!("{prefix}.weight"), Tensor::randn(&[input, output], std, rng));
    params.push(format!("{prefix}.bias"), Tensor::zeros(&[1, output]));
}

/// `x · W + b` on the tape.
pub fn linear(tape: &mut Tape, x: Var, weight: Var, bias: Var) -> Result<Var> {
    let xw = tape.matmul(x, weight)?;
    tape.add_row(xw, bias)
}

/// A chain of linear layers with ReLU between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mlp {
    /// Layer widths including input and output, e.g. `[in, hidden, out]`.
    pub dims: Vec<usize>,
}

impl Mlp {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output widths");
        Self { dims }
    }

    pub fn layers(&self) -> usize {
        self.dims.len() - 1
    }

    /// Number of parameter tensors this MLP contributes (weight + bias per layer).
    pub fn param_count(&self) -> usize {
        2 * self.layers()
    }

    pub fn init<R: Rng + ?Sized>(&self, params: &mut ParamSet, prefix: &str, rng: &mut R) {
        for (i, w) in self.dims.windows(2).enumerate() {
            init_linear(params, &format!("{prefix}.{i}"), w[0], w[1], rng);
        }
    }

    /// Forward pass; `vars` holds (weight, bias) pairs. ReLU follows every
    /// layer except the last unless `relu_last` is set.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], mut x: Var, relu_last: bool) -> Result<Var> {
        let n = self.layers();
        for i in 0..n {
            x = linear(tape, x, vars[2 * i], vars[2 * i + 1])?;
            if i + 1 < n || relu_last {
                x = tape.relu(x);
            }
        }
        Ok(x)
    }
}
