//! Marker-based watershed by priority flooding.
//!
//! Pixels are flooded from the markers in order of `(relief, insertion
//! sequence)`, so lower relief is claimed first and ties resolve in FIFO
//! order. A popped pixel whose already-labelled 8-neighbours carry a single
//! basin label joins that basin; one that touches two or more basins becomes
//! a watershed line pixel carrying the reserved label `label_count + 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::gray::GrayImage;
use super::labeling::LabelMap;
use super::threshold::BinaryMask;
use super::{ImgprocError, NEIGHBORS_8};

/// Label given to watershed-line pixels for a flood seeded with `markers`.
pub fn boundary_label(markers: &LabelMap) -> u32 {
    markers.label_count() + 1
}

/// Floods the whole image. The output's `label_count` is one above the
/// markers' to make room for the boundary label.
pub fn watershed(relief: &GrayImage, markers: &LabelMap) -> Result<LabelMap, ImgprocError> {
    watershed_in_domain(relief, markers, None)
}

/// Floods only pixels inside `domain` (when given); everything else stays 0.
/// Marker pixels keep their labels even outside the domain.
pub fn watershed_in_domain(
    relief: &GrayImage,
    markers: &LabelMap,
    domain: Option<&BinaryMask>,
) -> Result<LabelMap, ImgprocError> {
    let (w, h) = (markers.width(), markers.height());
    let shape_err = |ow: usize, oh: usize| ImgprocError::ShapeMismatch {
        expected_width: w,
        expected_height: h,
        width: ow,
        height: oh,
    };
    if (relief.width(), relief.height()) != (w, h) {
        return Err(shape_err(relief.width(), relief.height()));
    }
    if let Some(d) = domain {
        if (d.width(), d.height()) != (w, h) {
            return Err(shape_err(d.width(), d.height()));
        }
    }
    if !markers.data().iter().any(|&l| l > 0) {
        return Err(ImgprocError::NoMarkers);
    }

    let boundary = boundary_label(markers);
    let mut labels = markers.data().to_vec();
    let mut queued: Vec<bool> = labels.iter().map(|&l| l > 0).collect();
    if let Some(d) = domain {
        for (q, &m) in queued.iter_mut().zip(d.data()) {
            *q |= m == 0;
        }
    }
    // f32 relief in [0, 1]: the bit pattern of a non-negative float orders
    // like the float itself
    let key = |i: usize| (relief.data()[i] + 0.0).to_bits();
    let mut heap: BinaryHeap<Reverse<(u32, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;

    let mut push_neighbors = |i: usize, queued: &mut Vec<bool>, heap: &mut BinaryHeap<_>| {
        let (r, c) = (i / w, i % w);
        for &(dr, dc) in &NEIGHBORS_8 {
            if let Some((rr, cc)) = super::offset(r, c, dr, dc, w, h) {
                let j = rr * w + cc;
                if !queued[j] {
                    queued[j] = true;
                    heap.push(Reverse((key(j), seq, j)));
                    seq += 1;
                }
            }
        }
    };

    for (i, &l) in labels.iter().enumerate() {
        if l > 0 {
            push_neighbors(i, &mut queued, &mut heap);
        }
    }

    while let Some(Reverse((_, _, i))) = heap.pop() {
        let (r, c) = (i / w, i % w);
        let mut basin = 0u32;
        let mut conflict = false;
        for &(dr, dc) in &NEIGHBORS_8 {
            if let Some((rr, cc)) = super::offset(r, c, dr, dc, w, h) {
                let l = labels[rr * w + cc];
                if l == 0 || l == boundary {
                    continue;
                }
                if basin == 0 {
                    basin = l;
                } else if basin != l {
                    conflict = true;
                }
            }
        }
        labels[i] = if conflict || basin == 0 { boundary } else { basin };
        push_neighbors(i, &mut queued, &mut heap);
    }

    Ok(LabelMap::from_raw(w, h, labels, boundary))
}
