//! Binary erosion, dilation and opening with background padding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labeling::{connected_components, Connectivity};
use super::threshold::BinaryMask;
use super::{invalid, ImgprocError};

/// Anchor-centred set of `(dx, dy)` offsets; `dx` is the column offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(isize, isize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementShape {
    Box,
    Cross,
}

impl StructuringElement {
    pub fn new(mut offsets: Vec<(isize, isize)>) -> Result<Self, ImgprocError> {
        offsets.sort_unstable();
        offsets.dedup();
        if !offsets.contains(&(0, 0)) {
            return Err(invalid("structuring_element", "must contain the origin (0, 0)"));
        }
        Ok(Self { offsets })
    }

    /// Square of odd side `size`.
    pub fn square(size: usize) -> Result<Self, ImgprocError> {
        Self::shaped(ElementShape::Box, size)
    }

    /// Plus-shaped element of odd arm span `size`.
    pub fn cross(size: usize) -> Result<Self, ImgprocError> {
        Self::shaped(ElementShape::Cross, size)
    }

    pub fn shaped(shape: ElementShape, size: usize) -> Result<Self, ImgprocError> {
        if size == 0 || size % 2 == 0 {
            return Err(invalid(
                "structuring_element_size",
                format!("must be odd and >= 1, got {size}"),
            ));
        }
        let r = (size / 2) as isize;
        let offsets = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| shape == ElementShape::Box || dx == 0 || dy == 0)
            .collect();
        Self::new(offsets)
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    /// Point reflection through the anchor.
    pub fn reflected(&self) -> Self {
        let mut offsets: Vec<_> = self.offsets.iter().map(|&(dx, dy)| (-dx, -dy)).collect();
        offsets.sort_unstable();
        Self { offsets }
    }

    /// Largest absolute offset along either axis.
    pub fn radius(&self) -> usize {
        self.offsets
            .iter()
            .map(|&(dx, dy)| dx.unsigned_abs().max(dy.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }
}

/// `out(i, j) = min over K of b(i + dy, j + dx)`, reads outside the image are 0.
pub fn erode(b: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    apply(b, |b, r, c| {
        k.offsets()
            .iter()
            .all(|&(dx, dy)| b.get_padded(r + dy, c + dx))
    })
}

/// `out(i, j) = max over K of b(i - dy, j - dx)`, reads outside the image are 0.
pub fn dilate(b: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    apply(b, |b, r, c| {
        k.offsets()
            .iter()
            .any(|&(dx, dy)| b.get_padded(r - dy, c - dx))
    })
}

/// Erosion followed by dilation.
pub fn open(b: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    dilate(&erode(b, k), k)
}

/// Dilation followed by erosion.
pub fn close(b: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    erode(&dilate(b, k), k)
}

/// Sets every background pixel that cannot reach the image border through
/// 4-connected background.
pub fn fill_holes(b: &BinaryMask) -> BinaryMask {
    let (w, h) = (b.width(), b.height());
    let bg = connected_components(&b.not(), Connectivity::Four);
    let mut open_to_border = vec![false; bg.label_count() as usize + 1];
    for r in 0..h {
        for c in 0..w {
            if r == 0 || c == 0 || r + 1 == h || c + 1 == w {
                open_to_border[bg.get(r, c) as usize] = true;
            }
        }
    }
    BinaryMask::from_fn(w, h, |r, c| {
        let l = bg.get(r, c);
        l == 0 || !open_to_border[l as usize]
    })
}

fn apply(b: &BinaryMask, f: impl Fn(&BinaryMask, isize, isize) -> bool + Sync) -> BinaryMask {
    let (w, h) = (b.width(), b.height());
    let mut data = vec![0u8; w * h];
    if w > 0 {
        data.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
            for (c, o) in row.iter_mut().enumerate() {
                *o = f(b, r as isize, c as isize) as u8;
            }
        });
    }
    BinaryMask::from_raw(w, h, data)
}
