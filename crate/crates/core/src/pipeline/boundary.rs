//! Moore-neighbour contour tracing.

use super::PipelineError;
use crate::imgproc::{LabelMap, NEIGHBORS_8};

fn direction_index(dr: isize, dc: isize) -> usize {
    NEIGHBORS_8
        .iter()
        .position(|&d| d == (dr, dc))
        .expect("unit offset")
}

/// Outer contour of the region holding `label`, clockwise from the region's
/// raster-first pixel, closed (first = last). Points are `(row, col)`.
/// A single-pixel region yields that one pixel.
pub fn trace_boundary(labels: &LabelMap, label: u32) -> Result<Vec<(usize, usize)>, PipelineError> {
    let (w, h) = (labels.width(), labels.height());
    let start = labels
        .data()
        .iter()
        .position(|&l| l == label && label > 0)
        .ok_or(PipelineError::LabelNotFound(label))?;
    let s = (start / w, start % w);
    let inside = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && labels.get(r as usize, c as usize) == label
    };

    let mut path = vec![s];
    let mut p = s;
    // the west neighbour of the raster-first pixel is never in the region
    let mut back = 0usize;
    let mut first_step = None;
    loop {
        let found = (1..8).map(|k| (back + k) % 8).find(|&d| {
            let (dr, dc) = NEIGHBORS_8[d];
            inside(p.0 as isize + dr, p.1 as isize + dc)
        });
        let Some(d) = found else {
            return Ok(path);
        };
        let next = (
            (p.0 as isize + NEIGHBORS_8[d].0) as usize,
            (p.1 as isize + NEIGHBORS_8[d].1) as usize,
        );
        match first_step {
            None => first_step = Some(next),
            Some(f) if p == s && next == f => break,
            Some(_) => {}
        }
        // last background position examined, re-expressed around `next`
        let (pr, pc) = NEIGHBORS_8[(d + 7) % 8];
        let prev = (p.0 as isize + pr, p.1 as isize + pc);
        back = direction_index(prev.0 - next.0 as isize, prev.1 - next.1 as isize);
        path.push(next);
        p = next;
    }
    Ok(path)
}
