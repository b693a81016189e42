use super::RasterImage;

/// Per-pixel blue ratio of an image plus its mean.
#[derive(Clone, Debug, PartialEq)]
pub struct BlueRatioMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub mean: f64,
}

/// `(100·B / (1+R+G)) · (256 / (1+R+G+B))` on raw 8-bit values.
pub fn blue_ratio_pixel(rgb: [u8; 3]) -> f64 {
    let [r, g, b] = rgb.map(f64::from);
    (100.0 * b / (1.0 + r + g)) * (256.0 / (1.0 + r + g + b))
}

pub fn blue_ratio(image: &RasterImage) -> BlueRatioMap {
    let values: Vec<f64> = image.pixels().map(blue_ratio_pixel).collect();
    let mean = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    BlueRatioMap {
        width: image.width(),
        height: image.height(),
        values,
        mean,
    }
}

pub fn mean_blue_ratio(image: &RasterImage) -> f64 {
    blue_ratio(image).mean
}
