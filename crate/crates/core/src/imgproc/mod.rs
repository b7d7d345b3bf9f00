//! Single-channel image-processing primitives.
//!
//! Everything here is written against plain row-major buffers; no external
//! imaging crate is involved. All operations are pure and deterministic:
//! internal parallelism (rows, tiles) never changes a single output bit.

pub mod blur;
pub mod clahe;
pub mod dhe;
pub mod distance;
pub mod dump;
pub mod gray;
pub mod histogram;
pub mod labeling;
pub mod morphology;
pub mod threshold;
pub mod watershed;

pub use blur::gaussian_blur;
pub use clahe::clahe;
pub use dhe::{dhe, dhe_partitions};
pub use distance::{distance_transform, DistanceField};
pub use gray::{to_grayscale, GrayImage};
pub use histogram::{global_equalize, histogram, quantize, Histogram256};
pub use labeling::{connected_components, Connectivity, LabelMap};
pub use morphology::{close, dilate, erode, fill_holes, open, StructuringElement};
pub use threshold::{binarize_above_bin, otsu_threshold, threshold_fixed, BinaryMask};
pub use watershed::{watershed, watershed_in_domain};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImgprocError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("watershed needs at least one positive marker")]
    NoMarkers,
    #[error("shape mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    ShapeMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("raster data length {len} does not match {width}x{height}")]
    BadLength { width: usize, height: usize, len: usize },
    #[error("value {value} at index {index} outside the allowed range")]
    OutOfRange { index: usize, value: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ImgprocError {
    ImgprocError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_len(width: usize, height: usize, len: usize) -> Result<(), ImgprocError> {
    if width.checked_mul(height) != Some(len) {
        return Err(ImgprocError::BadLength { width, height, len });
    }
    Ok(())
}

/// 8-neighbourhood offsets as `(drow, dcol)`, clockwise from west.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
];

pub(crate) const NEIGHBORS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (0, 1), (1, 0)];

#[inline]
pub(crate) fn offset(
    row: usize,
    col: usize,
    dr: isize,
    dc: isize,
    width: usize,
    height: usize,
) -> Option<(usize, usize)> {
    let r = row.checked_add_signed(dr)?;
    let c = col.checked_add_signed(dc)?;
    (r < height && c < width).then_some((r, c))
}
