use super::{check_len, ImgprocError};
use crate::thermogram::VisualImage;

/// Luma weights applied to the R, G and B channels.
pub const LUMA_WEIGHTS: [f32; 3] = [0.299, 0.587, 0.114];

/// Single-channel intensity raster, row-major, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, ImgprocError> {
        check_len(width, height, data.len())?;
        if let Some((index, &v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ImgprocError::OutOfRange {
                index,
                value: v as f64,
            });
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image, clamping every sample into `[0, 1]` (NaN becomes 0).
    pub fn from_clamped(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self, ImgprocError> {
        check_len(width, height, data.len())?;
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![clamp_unit(value); width * height],
        }
    }

    /// Crate-internal constructor for kernels that already guarantee the range.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| clamp_unit(f(v))).collect(),
        }
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Weighted RGB to gray conversion, clamped into `[0, 1]`.
pub fn to_grayscale(img: &VisualImage) -> GrayImage {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| clamp_unit(wr * px[0] + wg * px[1] + wb * px[2]))
        .collect();
    GrayImage::from_raw(img.width(), img.height(), data)
}
