use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Encoder, Tap};
use crate::binio;
use crate::error::{contract, Error, Result};
use crate::slideio::{Patch, RasterImage};
use crate::tensor::Tensor;

pub const FEATURE_STORE_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SGFEAT\0\0";
// Rows per encoder call; bounds peak memory and keeps output order fixed.
const CHUNK: usize = 256;

/// Raw tap activations for one patch.
pub fn extract_features(encoder: &Encoder, patch: &RasterImage, tap: Tap) -> Result<Vec<f64>> {
    Ok(encoder.features(&[patch], tap)?.into_data())
}

/// Tap activations for every patch, one row per patch in input order.
pub fn featurize_patches(encoder: &Encoder, patches: &[Patch], tap: Tap) -> Result<Tensor> {
    if patches.is_empty() {
        return Err(contract("no patches to featurize"));
    }
    let dim = encoder.config.tap_dim(tap);
    let mut data = Vec::with_capacity(patches.len() * dim);
    for chunk in patches.chunks(CHUNK) {
        let images: Vec<&RasterImage> = chunk.iter().map(|p| &p.pixels).collect();
        data.extend(encoder.features(&images, tap)?.into_data());
    }
    Tensor::new(vec![patches.len(), dim], data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub grid_row: u32,
    pub grid_col: u32,
    pub centroid: (f64, f64),
    pub features: Vec<f64>,
}

/// Per-slide features at one tap.
///
/// Binary layout, little-endian: magic `SGFEAT\0\0`, `u32` version, then
/// strings (u32 length + UTF-8) `config_hash`, `slide_id`, `tap`, then `u32`
/// dim, `u64` record count, and per record `u32` grid row, `u32` grid col,
/// `f64` cx, `f64` cy, `dim × f64` features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStore {
    pub config_hash: String,
    pub slide_id: String,
    pub tap: Tap,
    pub dim: usize,
    pub records: Vec<FeatureRecord>,
}

impl FeatureStore {
    pub fn from_patches(
        encoder: &Encoder,
        patches: &[Patch],
        tap: Tap,
        slide_id: &str,
        config_hash: &str,
    ) -> Result<Self> {
        let feats = featurize_patches(encoder, patches, tap)?;
        let records = patches
            .iter()
            .enumerate()
            .map(|(i, p)| FeatureRecord {
                grid_row: p.grid_row as u32,
                grid_col: p.grid_col as u32,
                centroid: p.centroid,
                features: feats.row_slice(i).to_vec(),
            })
            .collect();
        Ok(Self {
            config_hash: config_hash.to_string(),
            slide_id: slide_id.to_string(),
            tap,
            dim: feats.cols(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `[n, dim]` feature matrix in record order.
    pub fn matrix(&self) -> Result<Tensor> {
        if self.records.is_empty() {
            return Err(Error::EmptySlide(self.slide_id.clone()));
        }
        let data = self.records.iter().flat_map(|r| r.features.iter().copied()).collect();
        Tensor::new(vec![self.records.len(), self.dim], data)
    }

    pub fn centroids(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| r.centroid).collect()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, MAGIC, FEATURE_STORE_VERSION)?;
        binio::write_str(w, &self.config_hash)?;
        binio::write_str(w, &self.slide_id)?;
        binio::write_str(w, self.tap.as_str())?;
        binio::write_u32(w, self.dim as u32)?;
        binio::write_u64(w, self.records.len() as u64)?;
        for r in &self.records {
            if r.features.len() != self.dim {
                return Err(contract(format!(
                    "record ({}, {}) has {} features, store dim is {}",
                    r.grid_row,
                    r.grid_col,
                    r.features.len(),
                    self.dim
                )));
            }
            binio::write_u32(w, r.grid_row)?;
            binio::write_u32(w, r.grid_col)?;
            binio::write_f64(w, r.centroid.0)?;
            binio::write_f64(w, r.centroid.1)?;
            binio::write_f64s(w, &r.features)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_header(r, MAGIC, FEATURE_STORE_VERSION, "feature store")?;
        let config_hash = binio::read_str(r, "feature store")?;
        let slide_id = binio::read_str(r, "feature store")?;
        let tap: Tap = binio::read_str(r, "feature store")?.parse().map_err(|e: Error| Error::Format {
            what: "feature store",
            detail: e.to_string(),
        })?;
        let dim = binio::read_u32(r)? as usize;
        let count = binio::read_u64(r)? as usize;
        let mut records = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let grid_row = binio::read_u32(r)?;
            let grid_col = binio::read_u32(r)?;
            let cx = binio::read_f64(r)?;
            let cy = binio::read_f64(r)?;
            records.push(FeatureRecord {
                grid_row,
                grid_col,
                centroid: (cx, cy),
                features: binio::read_f64s(r, dim)?,
            });
        }
        binio::expect_eof(r, "feature store")?;
        Ok(Self {
            config_hash,
            slide_id,
            tap,
            dim,
            records,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
