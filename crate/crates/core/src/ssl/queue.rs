use crate::error::{contract, shape, Result};
use crate::tensor::{linalg, Tensor};

const UNIT_TOLERANCE: f64 = 1e-6;

/// Fixed-capacity FIFO of unit-norm key vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureQueue {
    capacity: usize,
    dim: usize,
    /// Ring storage, `capacity × dim`.
    slots: Vec<f64>,
    len: usize,
    /// Slot the next key is written to.
    cursor: usize,
}

impl FeatureQueue {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity == 0 || dim == 0 {
            return Err(contract(format!("queue needs positive capacity and dim, got {capacity}, {dim}")));
        }
        Ok(Self {
            capacity,
            dim,
            slots: vec![0.0; capacity * dim],
            len: 0,
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends the rows of `keys` in order, evicting the oldest entries once
    /// full. Every row must have unit norm (±1e-6); nothing is inserted if
    /// any row fails the check.
    pub fn enqueue(&mut self, keys: &Tensor) -> Result<()> {
        let (rows, cols) = keys.as_matrix_dims()?;
        if cols != self.dim {
            return Err(shape(format!("queue holds {}-dim keys, got {cols}", self.dim)));
        }
        for r in 0..rows {
            let row = keys.row_slice(r);
            let norm = linalg::dot(row, row).sqrt();
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(contract(format!("key {r} has norm {norm}, expected 1")));
            }
        }
        for r in 0..rows {
            let start = self.cursor * self.dim;
            self.slots[start..start + self.dim].copy_from_slice(keys.row_slice(r));
            self.cursor = (self.cursor + 1) % self.capacity;
            self.len = (self.len + 1).min(self.capacity);
        }
        Ok(())
    }

    /// Stored keys from oldest to newest.
    pub fn keys(&self) -> Vec<&[f64]> {
        let start = if self.len < self.capacity { 0 } else { self.cursor };
        (0..self.len)
            .map(|i| {
                let slot = (start + i) % self.capacity;
                &self.slots[slot * self.dim..(slot + 1) * self.dim]
            })
            .collect()
    }

    /// Keys as a `[len, dim]` matrix, oldest first; `None` when empty.
    pub fn to_tensor(&self) -> Option<Tensor> {
        if self.len == 0 {
            return None;
        }
        let data = self.keys().concat();
        Some(Tensor::new(vec![self.len, self.dim], data).expect("consistent queue storage"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; 3];
        v[i % 3] = if i % 2 == 0 { 1.0 } else { -1.0 };
        v
    }

    fn batch(ids: &[usize]) -> Tensor {
        Tensor::matrix(ids.len(), 3, ids.iter().flat_map(|&i| unit(i)).collect()).unwrap()
    }

    #[test]
    fn fifo_examples() {
        let mut q = FeatureQueue::new(4, 3).unwrap();
        q.enqueue(&batch(&[0, 1, 2])).unwrap();
        assert_eq!(q.keys(), vec![&unit(0)[..], &unit(1)[..], &unit(2)[..]]);
        q.enqueue(&batch(&[3])).unwrap();
        q.enqueue(&batch(&[4])).unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q.keys()[0], &unit(1)[..]);
        assert_eq!(q.keys()[3], &unit(4)[..]);

        let mut q = FeatureQueue::new(4, 3).unwrap();
        q.enqueue(&batch(&[0, 1, 2, 3, 4, 5])).unwrap();
        let want: Vec<Vec<f64>> = (2..6).map(unit).collect();
        assert_eq!(q.keys(), want.iter().map(Vec::as_slice).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_unnormalised_or_wrong_dim_keys() {
        let mut q = FeatureQueue::new(4, 3).unwrap();
        let bad = Tensor::matrix(2, 3, vec![1.0, 0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        assert!(q.enqueue(&bad).is_err());
        assert!(q.is_empty(), "a failed enqueue inserts nothing");
        assert!(q.enqueue(&Tensor::row(vec![1.0, 0.0]).unwrap()).is_err());
        assert!(q.to_tensor().is_none());
    }
}
