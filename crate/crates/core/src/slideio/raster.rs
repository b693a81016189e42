use crate::error::{contract, shape, Result};

/// An 8-bit RGB image, row-major, channels interleaved.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if samples.len() != width * height * 3 {
            return Err(shape(format!(
                "{width}x{height} RGB image needs {} samples, got {}",
                width * height * 3,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// A `width × height` image filled with one colour.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut samples = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            samples.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            samples,
        }
    }

    pub fn white(width: usize, height: usize) -> Self {
        Self::filled(width, height, [255, 255, 255])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.samples[i], self.samples[i + 1], self.samples[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.samples[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.samples.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Copies the `w × h` rectangle whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<RasterImage> {
        if x + w > self.width || y + h > self.height {
            return Err(contract(format!(
                "crop {w}x{h}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut samples = Vec::with_capacity(w * h * 3);
        for row in y..y + h {
            let start = (row * self.width + x) * 3;
            samples.extend_from_slice(&self.samples[start..start + w * 3]);
        }
        RasterImage::new(w, h, samples)
    }

    /// Writes `tile` with its top-left corner at `(x, y)`.
    pub fn paste(&mut self, tile: &RasterImage, x: usize, y: usize) -> Result<()> {
        if x + tile.width > self.width || y + tile.height > self.height {
            return Err(contract("paste target out of bounds"));
        }
        for row in 0..tile.height {
            let dst = ((y + row) * self.width + x) * 3;
            let src = row * tile.width * 3;
            self.samples[dst..dst + tile.width * 3].copy_from_slice(&tile.samples[src..src + tile.width * 3]);
        }
        Ok(())
    }

    pub fn flip_horizontal(&self) -> RasterImage {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(self.width - 1 - x, y, self.pixel(x, y));
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> RasterImage {
        let mut out = self.clone();
        let row = self.width * 3;
        for y in 0..self.height {
            let dst = (self.height - 1 - y) * row;
            out.samples[dst..dst + row].copy_from_slice(&self.samples[y * row..(y + 1) * row]);
        }
        out
    }

    /// Pixel values scaled to `[-1, 1]`, row-major, channels interleaved.
    /// This is the encoder's input layout.
    pub fn to_unit_vector(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| s as f64 / 127.5 - 1.0).collect()
    }
}

/// ITU-R BT.601 luma of an RGB triple, on the 0..=255 scale.
pub(crate) fn luminance(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_paste_round_trip() {
        let mut img = RasterImage::white(6, 4);
        let tile = RasterImage::filled(2, 2, [1, 2, 3]);
        img.paste(&tile, 3, 1).unwrap();
        assert_eq!(img.crop(3, 1, 2, 2).unwrap(), tile);
        assert_eq!(img.pixel(2, 1), [255, 255, 255]);
        assert!(img.crop(5, 0, 2, 1).is_err());
    }

    #[test]
    fn flips_are_involutions() {
        let samples: Vec<u8> = (0..5 * 3 * 3).map(|i| i as u8).collect();
        let img = RasterImage::new(5, 3, samples).unwrap();
        assert_eq!(img.flip_horizontal().flip_horizontal(), img);
        assert_eq!(img.flip_vertical().flip_vertical(), img);
        assert_eq!(img.flip_horizontal().pixel(0, 0), img.pixel(4, 0));
        assert_eq!(img.flip_vertical().pixel(0, 0), img.pixel(0, 2));
    }
}
