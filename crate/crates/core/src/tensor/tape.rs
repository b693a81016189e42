use std::collections::BTreeMap;

use super::linalg;
use super::Tensor;
use crate::error::{contract, shape, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    L2NormalizeRows(Var),
    Sum(Var, Option<usize>),
    Mean(Var, Option<usize>),
    SoftmaxCrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        probs: Vec<f64>,
    },
    GatherRows(Var, Vec<usize>),
    ScatterAddRows {
        src: Var,
        index: Vec<usize>,
        weights: Option<Vec<f64>>,
    },
    ConcatCols(Vec<Var>),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records primitive operations for reverse-mode differentiation.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every trainable leaf on the tape.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    grads: BTreeMap<Var, Tensor>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(&var)
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    /// Gradients for `vars`, in order. Panics if one is not a trainable leaf.
    pub fn collect(&self, vars: &[Var]) -> Vec<Tensor> {
        vars.iter()
            .map(|v| {
                self.grads
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| panic!("{v:?} is not a trainable leaf"))
            })
            .collect()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every recorded node so the tape can host a fresh forward pass.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    /// Records a leaf. It is trainable iff `tensor.requires_grad()`.
    pub fn leaf(&mut self, tensor: Tensor) -> Var {
        let requires_grad = tensor.requires_grad();
        self.push(tensor, Op::Leaf, requires_grad)
    }

    /// Records a trainable leaf regardless of the tensor's flag.
    pub fn param(&mut self, tensor: Tensor) -> Var {
        self.leaf(tensor.with_requires_grad(true))
    }

    /// Records a non-trainable leaf.
    pub fn constant(&mut self, tensor: Tensor) -> Var {
        self.leaf(tensor.with_requires_grad(false))
    }

    fn push(&mut self, mut value: Tensor, op: Op, requires_grad: bool) -> Var {
        value.requires_grad = requires_grad;
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn dims(&self, v: Var) -> Result<(usize, usize)> {
        self.nodes[v.0].value.as_matrix_dims()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims(a)?;
        let (k2, n) = self.dims(b)?;
        if k != k2 {
            return Err(shape(format!(
                "matmul {:?} x {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let data = linalg::matmul(self.value(a).data(), self.value(b).data(), m, k, n);
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::new(vec![m, n], data)?, Op::MatMul(a, b), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x + y);
        let shp = self.value(a).shape().to_vec();
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::new(shp, data)?, Op::Add(a, b), rg))
    }

    /// Adds a row vector `b` (`[1, m]` or `[m]`) to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (_, m) = self.dims(a)?;
        let (br, bm) = self.dims(b)?;
        if br != 1 || bm != m {
            return Err(shape(format!(
                "add_row {:?} + {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let mut data = self.value(a).data().to_vec();
        linalg::add_row_inplace(&mut data, self.value(b).data());
        let shp = self.value(a).shape().to_vec();
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::new(shp, data)?, Op::AddRow(a, b), rg))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x * y);
        let shp = self.value(a).shape().to_vec();
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::new(shp, data)?, Op::Mul(a, b), rg))
    }

    /// Multiplies by a constant scalar.
    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a).map(|x| x * factor);
        let rg = self.rg(&[a]);
        self.push(value, Op::Scale(a, factor), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        let rg = self.rg(&[a]);
        self.push(value, Op::Relu(a), rg)
    }

    /// Scales each row to unit L2 norm. All-zero rows map to zero.
    pub fn l2_normalize_rows(&mut self, a: Var) -> Result<Var> {
        let (_, c) = self.dims(a)?;
        let data = linalg::l2_normalize_rows(self.value(a).data(), c);
        let shp = self.value(a).shape().to_vec();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::new(shp, data)?, Op::L2NormalizeRows(a), rg))
    }

    /// Sums all entries (`axis = None`, result `[1]`), over rows (`Some(0)`,
    /// result `[1, cols]`) or over columns (`Some(1)`, result `[rows, 1]`).
    pub fn sum(&mut self, a: Var, axis: Option<usize>) -> Result<Var> {
        let value = self.reduce(a, axis)?;
        let rg = self.rg(&[a]);
        Ok(self.push(value, Op::Sum(a, axis), rg))
    }

    /// Like [`Tape::sum`] but divided by the number of reduced entries.
    pub fn mean(&mut self, a: Var, axis: Option<usize>) -> Result<Var> {
        let count = self.reduce_count(a, axis)? as f64;
        let value = self.reduce(a, axis)?.map(|x| x / count);
        let rg = self.rg(&[a]);
        Ok(self.push(value, Op::Mean(a, axis), rg))
    }

    fn reduce_count(&self, a: Var, axis: Option<usize>) -> Result<usize> {
        let (r, c) = self.dims(a)?;
        match axis {
            None => Ok(r * c),
            Some(0) => Ok(r),
            Some(1) => Ok(c),
            Some(ax) => Err(contract(format!("reduction axis {ax} out of range"))),
        }
    }

    fn reduce(&self, a: Var, axis: Option<usize>) -> Result<Tensor> {
        let (r, c) = self.dims(a)?;
        let x = self.value(a).data();
        match axis {
            None => Ok(Tensor::scalar(x.iter().sum())),
            Some(0) => {
                let mut out = vec![0.0; c];
                for row in x.chunks(c) {
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += v;
                    }
                }
                Tensor::new(vec![1, c], out)
            }
            Some(1) => Tensor::new(vec![r, 1], x.chunks(c).map(|row| row.iter().sum()).collect()),
            Some(ax) => Err(contract(format!("reduction axis {ax} out of range"))),
        }
    }

    /// Mean softmax cross-entropy of the rows of `logits` against `labels`.
    /// A `[C]` vector is treated as a single row.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let (r, c) = self.dims(logits)?;
        if c < 2 {
            return Err(contract(format!("cross-entropy needs >= 2 classes, got {c}")));
        }
        if labels.len() != r {
            return Err(shape(format!("{r} logit rows but {} labels", labels.len())));
        }
        let x = self.value(logits).data();
        let mut probs = vec![0.0; r * c];
        let mut total = 0.0;
        for (i, &label) in labels.iter().enumerate() {
            if label >= c {
                return Err(contract(format!("label {label} out of range for {c} classes")));
            }
            let row = &x[i * c..(i + 1) * c];
            let (loss, p) = stable_softmax_ce(row, label);
            probs[i * c..(i + 1) * c].copy_from_slice(&p);
            total += loss;
        }
        let rg = self.rg(&[logits]);
        Ok(self.push(
            Tensor::scalar(total / r as f64),
            Op::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// Output row `i` is input row `index[i]`.
    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Result<Var> {
        let (r, c) = self.dims(a)?;
        if index.is_empty() {
            return Err(contract("gather_rows with an empty index list"));
        }
        let x = self.value(a).data();
        let mut out = Vec::with_capacity(index.len() * c);
        for &i in index {
            if i >= r {
                return Err(contract(format!("gather index {i} out of range for {r} rows")));
            }
            out.extend_from_slice(&x[i * c..(i + 1) * c]);
        }
        let rg = self.rg(&[a]);
        Ok(self.push(
            Tensor::new(vec![index.len(), c], out)?,
            Op::GatherRows(a, index.to_vec()),
            rg,
        ))
    }

    /// Output row `index[e]` accumulates `weights[e] * src[e]` (weight 1 when
    /// `weights` is `None`). The result has `rows` rows; untouched rows are 0.
    pub fn scatter_add_rows(
        &mut self,
        src: Var,
        index: &[usize],
        weights: Option<&[f64]>,
        rows: usize,
    ) -> Result<Var> {
        let (r, c) = self.dims(src)?;
        if index.len() != r {
            return Err(shape(format!("{r} source rows but {} indices", index.len())));
        }
        if let Some(w) = weights {
            if w.len() != r {
                return Err(shape(format!("{r} source rows but {} weights", w.len())));
            }
        }
        if rows == 0 {
            return Err(contract("scatter_add_rows into zero rows"));
        }
        let x = self.value(src).data();
        let mut out = vec![0.0; rows * c];
        for (e, &dst) in index.iter().enumerate() {
            if dst >= rows {
                return Err(contract(format!("scatter index {dst} out of range for {rows} rows")));
            }
            let w = weights.map_or(1.0, |w| w[e]);
            let orow = &mut out[dst * c..(dst + 1) * c];
            for (o, v) in orow.iter_mut().zip(&x[e * c..(e + 1) * c]) {
                *o += w * v;
            }
        }
        let rg = self.rg(&[src]);
        Ok(self.push(
            Tensor::new(vec![rows, c], out)?,
            Op::ScatterAddRows {
                src,
                index: index.to_vec(),
                weights: weights.map(<[f64]>::to_vec),
            },
            rg,
        ))
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(contract("concat_cols of nothing"));
        }
        let r = self.dims(parts[0])?.0;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (pr, pc) = self.dims(p)?;
            if pr != r {
                return Err(shape(format!("concat_cols rows {pr} vs {r}")));
            }
            widths.push(pc);
        }
        let total: usize = widths.iter().sum();
        let mut out = vec![0.0; r * total];
        let mut offset = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let x = self.value(p).data();
            for i in 0..r {
                out[i * total + offset..i * total + offset + w].copy_from_slice(&x[i * w..(i + 1) * w]);
            }
            offset += w;
        }
        let rg = self.rg(parts);
        Ok(self.push(Tensor::new(vec![r, total], out)?, Op::ConcatCols(parts.to_vec()), rg))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(shape(format!(
                "{what} {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    /// Reverse-mode gradients of the scalar `loss` with respect to every
    /// trainable leaf. Leaves the loss does not depend on get zeros. The tape
    /// itself is not modified.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        let mut out = Gradients::default();

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else {
                if matches!(node.op, Op::Leaf) {
                    out.grads.insert(Var(i), Tensor::zeros(node.value.shape()));
                }
                continue;
            };
            self.propagate(i, &g, &mut grads, &mut out)?;
        }
        // Trainable leaves recorded after the loss cannot influence it.
        for (i, node) in self.nodes.iter().enumerate().skip(loss.0 + 1) {
            if node.requires_grad && matches!(node.op, Op::Leaf) {
                out.grads.insert(Var(i), Tensor::zeros(node.value.shape()));
            }
        }
        Ok(out)
    }

    fn propagate(
        &self,
        i: usize,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
        out: &mut Gradients,
    ) -> Result<()> {
        let node = &self.nodes[i];
        let mut send = |v: Var, contrib: Vec<f64>| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            match &mut grads[v.0] {
                Some(acc) => acc.iter_mut().zip(&contrib).for_each(|(a, c)| *a += c),
                slot @ None => *slot = Some(contrib),
            }
        };
        match &node.op {
            Op::Leaf => {
                out.grads
                    .insert(Var(i), Tensor::new(node.value.shape().to_vec(), g.to_vec())?);
            }
            Op::MatMul(a, b) => {
                let (m, k) = self.dims(*a)?;
                let (_, n) = self.dims(*b)?;
                if self.nodes[a.0].requires_grad {
                    send(*a, linalg::matmul_nt(g, self.value(*b).data(), m, n, k));
                }
                if self.nodes[b.0].requires_grad {
                    send(*b, linalg::matmul_tn(self.value(*a).data(), g, m, k, n));
                }
            }
            Op::Add(a, b) => {
                send(*a, g.to_vec());
                send(*b, g.to_vec());
            }
            Op::AddRow(a, b) => {
                send(*a, g.to_vec());
                let m = self.value(*b).len();
                let mut col = vec![0.0; m];
                for row in g.chunks(m) {
                    col.iter_mut().zip(row).for_each(|(c, v)| *c += v);
                }
                send(*b, col);
            }
            Op::Mul(a, b) => {
                send(*a, zip_map(g, self.value(*b).data(), |x, y| x * y));
                send(*b, zip_map(g, self.value(*a).data(), |x, y| x * y));
            }
            Op::Scale(a, f) => send(*a, g.iter().map(|x| x * f).collect()),
            Op::Relu(a) => send(
                *a,
                zip_map(g, self.value(*a).data(), |gv, x| if x > 0.0 { gv } else { 0.0 }),
            ),
            Op::L2NormalizeRows(a) => {
                let c = self.value(*a).cols();
                let x = self.value(*a).data();
                let y = node.value.data();
                let mut dx = vec![0.0; x.len()];
                for ((dxr, xr), (yr, gr)) in dx
                    .chunks_mut(c)
                    .zip(x.chunks(c))
                    .zip(y.chunks(c).zip(g.chunks(c)))
                {
                    let norm = linalg::dot(xr, xr).sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let yg = linalg::dot(yr, gr);
                    for ((d, &yv), &gv) in dxr.iter_mut().zip(yr).zip(gr) {
                        *d = (gv - yv * yg) / norm;
                    }
                }
                send(*a, dx);
            }
            Op::Sum(a, axis) => send(*a, self.spread(*a, *axis, g, 1.0)?),
            Op::Mean(a, axis) => {
                let count = self.reduce_count(*a, *axis)? as f64;
                send(*a, self.spread(*a, *axis, g, 1.0 / count)?);
            }
            Op::SoftmaxCrossEntropy {
                logits,
                labels,
                probs,
            } => {
                let c = self.value(*logits).cols();
                let scale = g[0] / labels.len() as f64;
                let mut d = probs.clone();
                for (r, &label) in labels.iter().enumerate() {
                    d[r * c + label] -= 1.0;
                }
                d.iter_mut().for_each(|v| *v *= scale);
                send(*logits, d);
            }
            Op::GatherRows(a, index) => {
                let c = self.value(*a).cols();
                let mut d = vec![0.0; self.value(*a).len()];
                for (e, &src) in index.iter().enumerate() {
                    let drow = &mut d[src * c..(src + 1) * c];
                    drow.iter_mut()
                        .zip(&g[e * c..(e + 1) * c])
                        .for_each(|(x, v)| *x += v);
                }
                send(*a, d);
            }
            Op::ScatterAddRows {
                src,
                index,
                weights,
            } => {
                let c = self.value(*src).cols();
                let mut d = vec![0.0; self.value(*src).len()];
                for (e, &dst) in index.iter().enumerate() {
                    let w = weights.as_ref().map_or(1.0, |w| w[e]);
                    let drow = &mut d[e * c..(e + 1) * c];
                    drow.iter_mut()
                        .zip(&g[dst * c..(dst + 1) * c])
                        .for_each(|(x, v)| *x = w * v);
                }
                send(*src, d);
            }
            Op::ConcatCols(parts) => {
                let total = node.value.cols();
                let r = node.value.rows();
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    let mut d = Vec::with_capacity(r * w);
                    for row in 0..r {
                        d.extend_from_slice(&g[row * total + offset..row * total + offset + w]);
                    }
                    send(p, d);
                    offset += w;
                }
            }
        }
        Ok(())
    }

    fn spread(&self, a: Var, axis: Option<usize>, g: &[f64], factor: f64) -> Result<Vec<f64>> {
        let (r, c) = self.dims(a)?;
        let mut d = vec![0.0; r * c];
        match axis {
            None => d.fill(g[0] * factor),
            Some(0) => {
                for row in d.chunks_mut(c) {
                    row.iter_mut().zip(g).for_each(|(x, v)| *x = v * factor);
                }
            }
            Some(1) => {
                for (row, gv) in d.chunks_mut(c).zip(g) {
                    row.fill(gv * factor);
                }
            }
            Some(ax) => return Err(contract(format!("reduction axis {ax} out of range"))),
        }
        Ok(d)
    }
}

fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Loss and softmax probabilities for one row, with max-subtraction.
fn stable_softmax_ce(row: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = z.ln() - (row[label] - max);
    (loss, exps.into_iter().map(|e| e / z).collect())
}

/// `−log softmax(logits)[label]` and its gradient `softmax − one_hot`.
///
/// `logits` must hold a single row (`[C]` or `[1, C]`) with `C >= 2`.
pub fn softmax_cross_entropy(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    let (r, c) = logits.as_matrix_dims()?;
    if r != 1 {
        return Err(shape(format!("expected one row of logits, got {:?}", logits.shape())));
    }
    if c < 2 {
        return Err(contract(format!("cross-entropy needs >= 2 classes, got {c}")));
    }
    if label >= c {
        return Err(contract(format!("label {label} out of range for {c} classes")));
    }
    let (loss, mut probs) = stable_softmax_ce(logits.data(), label);
    probs[label] -= 1.0;
    Ok((loss, Tensor::new(logits.shape().to_vec(), probs)?))
}
