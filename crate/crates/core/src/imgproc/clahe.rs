//! Contrast-limited adaptive histogram equalization.

use rayon::prelude::*;

use super::gray::{clamp_unit, GrayImage};
use super::histogram::{equalization_lut, quantize, BINS};
use super::{invalid, ImgprocError};

pub const DEFAULT_TILES: usize = 8;
pub const DEFAULT_CLIP_LIMIT: f64 = 4.0;

/// Tile `i` of `n` over `len` pixels spans `[i*len/n, (i+1)*len/n)`.
fn tile_bounds(i: usize, n: usize, len: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

fn tile_center(i: usize, n: usize, len: usize) -> f64 {
    let (a, b) = tile_bounds(i, n, len);
    (a + b - 1) as f64 / 2.0
}

/// Lower tile index and weight of the upper tile for a pixel coordinate.
/// Outside the outermost centres the nearest tile is replicated.
fn interp_coord(x: usize, centers: &[f64]) -> (usize, usize, f32) {
    let x = x as f64;
    let n = centers.len();
    if x <= centers[0] {
        return (0, 0, 0.0);
    }
    if x >= centers[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let i = centers.partition_point(|&c| c <= x) - 1;
    let w = (x - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, w as f32)
}

/// Clips a tile histogram at `limit` counts and spreads the excess evenly
/// over all bins in a single pass; the integer remainder goes to bin 255.
pub(crate) fn clip_histogram(counts: &mut [u64; BINS], limit: u64) {
    let mut excess = 0u64;
    for c in counts.iter_mut() {
        if *c > limit {
            excess += *c - limit;
            *c = limit;
        }
    }
    let inc = excess / BINS as u64;
    let residual = excess - inc * BINS as u64;
    for c in counts.iter_mut() {
        *c += inc;
    }
    counts[BINS - 1] += residual;
}

/// Per-tile mapping; a degenerate tile maps every bin to its own value.
fn tile_lut(g: &GrayImage, rows: (usize, usize), cols: (usize, usize), clip_limit: f64) -> Vec<f32> {
    let mut counts = [0u64; BINS];
    for r in rows.0..rows.1 {
        for &v in &g.row(r)[cols.0..cols.1] {
            counts[quantize(v) as usize] += 1;
        }
    }
    let n = ((rows.1 - rows.0) * (cols.1 - cols.0)) as f64;
    let limit = ((clip_limit * n / BINS as f64).floor() as u64).max(1);
    clip_histogram(&mut counts, limit);
    equalization_lut(&counts).unwrap_or_else(|| (0..BINS).map(|q| q as f32 / 255.0).collect())
}

pub fn clahe(
    g: &GrayImage,
    tiles_x: usize,
    tiles_y: usize,
    clip_limit: f64,
) -> Result<GrayImage, ImgprocError> {
    if tiles_x == 0 || tiles_y == 0 {
        return Err(invalid("tiles", "tile counts must be >= 1"));
    }
    if clip_limit < 1.0 || !clip_limit.is_finite() {
        return Err(invalid("clip_limit", format!("must be finite and >= 1, got {clip_limit}")));
    }
    let (w, h) = (g.width(), g.height());
    if w < tiles_x || h < tiles_y {
        return Err(invalid(
            "tiles",
            format!("{w}x{h} image is smaller than the {tiles_x}x{tiles_y} tile grid"),
        ));
    }
    if g.occupied_bins_is_single() {
        return Ok(g.clone());
    }

    let luts: Vec<Vec<f32>> = (0..tiles_y * tiles_x)
        .into_par_iter()
        .map(|t| {
            let (ty, tx) = (t / tiles_x, t % tiles_x);
            tile_lut(g, tile_bounds(ty, tiles_y, h), tile_bounds(tx, tiles_x, w), clip_limit)
        })
        .collect();
    let cx: Vec<f64> = (0..tiles_x).map(|i| tile_center(i, tiles_x, w)).collect();
    let cy: Vec<f64> = (0..tiles_y).map(|i| tile_center(i, tiles_y, h)).collect();
    let col_interp: Vec<_> = (0..w).map(|c| interp_coord(c, &cx)).collect();

    let mut out = vec![0.0f32; w * h];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(r, row_out)| {
        let (y0, y1, wy) = interp_coord(r, &cy);
        for (c, o) in row_out.iter_mut().enumerate() {
            let (x0, x1, wx) = col_interp[c];
            let q = quantize(g.get(r, c)) as usize;
            let m00 = luts[y0 * tiles_x + x0][q];
            let m01 = luts[y0 * tiles_x + x1][q];
            let m10 = luts[y1 * tiles_x + x0][q];
            let m11 = luts[y1 * tiles_x + x1][q];
            let top = m00 + wx * (m01 - m00);
            let bottom = m10 + wx * (m11 - m10);
            *o = clamp_unit(top + wy * (bottom - top));
        }
    });
    Ok(GrayImage::from_raw(w, h, out))
}

impl GrayImage {
    fn occupied_bins_is_single(&self) -> bool {
        match self.data().first() {
            Some(&v0) => {
                let q0 = quantize(v0);
                self.data().iter().all(|&v| quantize(v) == q0)
            }
            None => true,
        }
    }
}
