use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Patch, RasterImage};
use crate::binio;
use crate::error::{contract, Error, Result};

pub const PATCH_SET_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SGPATCH\0";

/// All kept patches of one slide.
///
/// Binary layout, little-endian: magic `SGPATCH\0`, `u32` version, strings
/// (u32 length + UTF-8) `config_hash` and `slide_id`, `u32` patch size P,
/// `u64` count, then per patch `u32` grid row, `u32` grid col, `f64` cx,
/// `f64` cy, `f64` tissue fraction and `P·P·3` RGB bytes.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchSet {
    pub config_hash: String,
    pub slide_id: String,
    pub patch_size: usize,
    pub patches: Vec<Patch>,
}

impl PatchSet {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, MAGIC, PATCH_SET_VERSION)?;
        binio::write_str(w, &self.config_hash)?;
        binio::write_str(w, &self.slide_id)?;
        binio::write_u32(w, self.patch_size as u32)?;
        binio::write_u64(w, self.patches.len() as u64)?;
        for p in &self.patches {
            if p.pixels.width() != self.patch_size || p.pixels.height() != self.patch_size {
                return Err(contract(format!(
                    "patch ({}, {}) is not {}x{}",
                    p.grid_row, p.grid_col, self.patch_size, self.patch_size
                )));
            }
            binio::write_u32(w, p.grid_row as u32)?;
            binio::write_u32(w, p.grid_col as u32)?;
            binio::write_f64(w, p.centroid.0)?;
            binio::write_f64(w, p.centroid.1)?;
            binio::write_f64(w, p.tissue_fraction)?;
            w.write_all(p.pixels.samples())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_header(r, MAGIC, PATCH_SET_VERSION, "patch set")?;
        let config_hash = binio::read_str(r, "patch set")?;
        let slide_id = binio::read_str(r, "patch set")?;
        let size = binio::read_u32(r)? as usize;
        if size == 0 {
            return Err(Error::Format {
                what: "patch set",
                detail: "patch size 0".into(),
            });
        }
        let count = binio::read_u64(r)? as usize;
        let mut patches = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let grid_row = binio::read_u32(r)? as usize;
            let grid_col = binio::read_u32(r)? as usize;
            let cx = binio::read_f64(r)?;
            let cy = binio::read_f64(r)?;
            let tissue_fraction = binio::read_f64(r)?;
            let mut samples = vec![0u8; size * size * 3];
            r.read_exact(&mut samples)?;
            patches.push(Patch {
                pixels: RasterImage::new(size, size, samples)?,
                grid_row,
                grid_col,
                centroid: (cx, cy),
                tissue_fraction,
            });
        }
        binio::expect_eof(r, "patch set")?;
        Ok(Self {
            config_hash,
            slide_id,
            patch_size: size,
            patches,
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_truncation() {
        let mut img = RasterImage::filled(4, 4, [10, 20, 30]);
        img.set_pixel(3, 2, [200, 100, 0]);
        let set = PatchSet {
            config_hash: "h".into(),
            slide_id: "slide-001".into(),
            patch_size: 4,
            patches: vec![Patch {
                pixels: img,
                grid_row: 2,
                grid_col: 5,
                centroid: Patch::centroid_of(2, 5, 4),
                tissue_fraction: 0.8125,
            }],
        };
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        assert_eq!(PatchSet::read_from(&mut buf.as_slice()).unwrap(), set);
        buf.truncate(buf.len() - 1);
        assert!(PatchSet::read_from(&mut buf.as_slice()).is_err());
    }
}
