use crate::error::{shape, Result};
use crate::tensor::{Tape, Tensor, Var};
use crate::wsigraph::Adjacency;

/// `out[u] = Σ_v w(u, v) · h[v]` on the tape.
pub fn aggregate(tape: &mut Tape, h: Var, adj: &Adjacency) -> Result<Var> {
    let (n, d) = tape.value(h).as_matrix_dims()?;
    if n != adj.n {
        return Err(shape(format!("{n} node rows but adjacency over {} nodes", adj.n)));
    }
    if adj.entries.is_empty() {
        return Ok(tape.constant(Tensor::zeros(&[n, d])));
    }
    let gathered = tape.gather_rows(h, &adj.sources())?;
    tape.scatter_add_rows(gathered, &adj.targets(), Some(&adj.weights()), n)
}

/// `relu(Â · H · W)` with `Â` a normalised adjacency.
pub fn gcn_layer(tape: &mut Tape, h: Var, adj: &Adjacency, w: Var) -> Result<Var> {
    let hw = tape.matmul(h, w)?;
    let agg = aggregate(tape, hw, adj)?;
    Ok(tape.relu(agg))
}

/// `relu(A · H · W_neigh + H · W_self + b)` with `A` the raw 0/1 adjacency.
pub fn basic_gnn_layer(tape: &mut Tape, h: Var, adj: &Adjacency, w_self: Var, w_neigh: Var, b: Var) -> Result<Var> {
    let neigh = tape.matmul(h, w_neigh)?;
    let neigh = aggregate(tape, neigh, adj)?;
    let own = tape.matmul(h, w_self)?;
    let sum = tape.add(neigh, own)?;
    let sum = tape.add_row(sum, b)?;
    Ok(tape.relu(sum))
}
