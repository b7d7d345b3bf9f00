//! Exact Euclidean distance transform.
//!
//! Two separable passes of the lower-envelope-of-parabolas 1D transform
//! (columns, then rows) over squared distances. The image sits inside an
//! implicit one-pixel background frame, so a foreground pixel on the border
//! is at distance 1 from the outside.

use rayon::prelude::*;

use super::threshold::BinaryMask;

/// Per-pixel Euclidean distance to the nearest background pixel, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

const INF: f64 = f64::INFINITY;

/// 1D squared-distance transform of a sampled function `f` (lower envelope
/// of parabolas rooted at each sample).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(i) => i,
        None => {
            out.iter_mut().for_each(|o| *o = INF);
            return;
        }
    };
    v.push(first);
    z.push(-INF);
    z.push(INF);
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                v.pop();
                z.pop();
                k -= 1;
                continue;
            }
            k += 1;
            v.push(q);
            z[k] = s;
            z.push(INF);
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance transform with an implicit zero frame.
pub fn distance_transform(b: &BinaryMask) -> DistanceField {
    let (w, h) = (b.width(), b.height());
    // padded grid with a background frame
    let (pw, ph) = (w + 2, h + 2);
    let init = |r: usize, c: usize| -> f64 {
        if r == 0 || c == 0 || r == ph - 1 || c == pw - 1 || !b.get(r - 1, c - 1) {
            0.0
        } else {
            INF
        }
    };

    // column pass (stored transposed: one column per chunk)
    let mut cols = vec![0.0f64; pw * ph];
    cols.par_chunks_mut(ph).enumerate().for_each(|(c, out)| {
        let f: Vec<f64> = (0..ph).map(|r| init(r, c)).collect();
        let (mut v, mut z) = (Vec::with_capacity(ph), Vec::with_capacity(ph + 1));
        edt_1d(&f, out, &mut v, &mut z);
    });

    // row pass over the interior rows only
    let mut data = vec![0.0f64; w * h];
    if w > 0 {
        data.par_chunks_mut(w).enumerate().for_each(|(r, out)| {
            let pr = r + 1;
            let f: Vec<f64> = (0..pw).map(|c| cols[c * ph + pr]).collect();
            let mut row = vec![0.0; pw];
            let (mut v, mut z) = (Vec::with_capacity(pw), Vec::with_capacity(pw + 1));
            edt_1d(&f, &mut row, &mut v, &mut z);
            for (o, &d2) in out.iter_mut().zip(&row[1..pw - 1]) {
                *o = d2.sqrt();
            }
        });
    }
    DistanceField { width: w, height: h, data }
}
