//! Named-tensor checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "SGCKPT\0\0"
//! version    u32      = 1
//! n_meta     u32, then n_meta × (key: str, value: str)
//! n_tensors  u32, then n_tensors × (name: str, rank: u32, dims: u64 × rank,
//!                                   data: f64 × prod(dims))
//! has_adam   u8 (0 or 1); when 1:
//!            step u64, beta1 f64, beta2 f64, eps f64, weight_decay f64,
//!            then per tensor: first moment f64 × len, second moment f64 × len
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes.

use std::io::{Read, Write};
use std::path::Path;

use super::{AdamConfig, AdamState, ParamSet, Tensor};
use crate::binio::*;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SGCKPT\0\0";

/// Parameters, optional optimizer state and free-form string metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: Vec<(String, String)>,
    pub params: ParamSet,
    pub optimizer: Option<AdamState>,
}

impl Checkpoint {
    pub fn new(params: ParamSet) -> Self {
        Self {
            meta: Vec::new(),
            params,
            optimizer: None,
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.push((key.into(), value.into()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require_meta(&self, key: &str) -> Result<&str> {
        self.meta(key).ok_or_else(|| Error::Format {
            what: "checkpoint",
            detail: format!("missing metadata key {key:?}"),
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, MAGIC, CHECKPOINT_VERSION)?;
        write_u32(w, self.meta.len() as u32)?;
        for (k, v) in &self.meta {
            write_str(w, k)?;
            write_str(w, v)?;
        }
        write_u32(w, self.params.len() as u32)?;
        for (name, t) in self.params.iter() {
            write_str(w, name)?;
            write_u32(w, t.rank() as u32)?;
            for &d in t.shape() {
                write_u64(w, d as u64)?;
            }
            write_f64s(w, t.data())?;
        }
        match &self.optimizer {
            None => w.write_all(&[0])?,
            Some(st) => {
                w.write_all(&[1])?;
                write_u64(w, st.step)?;
                write_f64(w, st.config.beta1)?;
                write_f64(w, st.config.beta2)?;
                write_f64(w, st.config.eps)?;
                write_f64(w, st.config.weight_decay)?;
                for (m, v) in st.first_moment.iter().zip(&st.second_moment) {
                    write_f64s(w, m.data())?;
                    write_f64s(w, v.data())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        read_header(r, MAGIC, CHECKPOINT_VERSION, "checkpoint")?;
        let n_meta = read_u32(r)?;
        let mut meta = Vec::with_capacity(n_meta as usize);
        for _ in 0..n_meta {
            meta.push((read_str(r, "checkpoint")?, read_str(r, "checkpoint")?));
        }
        let n = read_u32(r)?;
        let mut params = ParamSet::new();
        for _ in 0..n {
            let name = read_str(r, "checkpoint")?;
            let rank = read_u32(r)? as usize;
            if rank == 0 || rank > 8 {
                return Err(Error::Format {
                    what: "checkpoint",
                    detail: format!("tensor {name} has rank {rank}"),
                });
            }
            let dims = (0..rank)
                .map(|_| read_u64(r).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let len = dims.iter().product();
            let data = read_f64s(r, len)?;
            params.push(name, Tensor::new(dims, data)?);
        }
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let optimizer = match flag[0] {
            0 => None,
            1 => {
                let step = read_u64(r)?;
                let config = AdamConfig {
                    beta1: read_f64(r)?,
                    beta2: read_f64(r)?,
                    eps: read_f64(r)?,
                    weight_decay: read_f64(r)?,
                };
                let mut st = AdamState::new(params.tensors(), config);
                st.step = step;
                for (m, v) in st.first_moment.iter_mut().zip(st.second_moment.iter_mut()) {
                    let len = m.len();
                    m.data_mut().copy_from_slice(&read_f64s(r, len)?);
                    v.data_mut().copy_from_slice(&read_f64s(r, len)?);
                }
                Some(st)
            }
            f => {
                return Err(Error::Format {
                    what: "checkpoint",
                    detail: format!("optimizer flag {f}"),
                })
            }
        };
        expect_eof(r, "checkpoint")?;
        Ok(Self {
            meta,
            params,
            optimizer,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice())
    }
}
