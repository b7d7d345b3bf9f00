use rayon::prelude::*;

use super::gray::{clamp_unit, GrayImage};
use super::{invalid, ImgprocError};

/// Normalized 1D Gaussian kernel of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Reflect-101 index folding (`-1 -> 1`, `n -> n-2`).
#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

fn convolve_line(src: &[f64], dst: &mut [f64], kernel: &[f64]) {
    let r = (kernel.len() / 2) as isize;
    let n = src.len();
    for (i, d) in dst.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            acc += w * src[reflect101(i as isize + k as isize - r, n)];
        }
        *d = acc;
    }
}

/// Separable Gaussian smoothing with reflect-101 borders.
pub fn gaussian_blur(g: &GrayImage, sigma: f64) -> Result<GrayImage, ImgprocError> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(invalid("sigma", format!("must be finite and > 0, got {sigma}")));
    }
    let (w, h) = (g.width(), g.height());
    if w == 0 || h == 0 {
        return Ok(g.clone());
    }
    let kernel = gaussian_kernel(sigma);

    let mut horiz = vec![0.0f64; w * h];
    horiz.par_chunks_mut(w).enumerate().for_each(|(r, out)| {
        let src: Vec<f64> = g.row(r).iter().map(|&v| v as f64).collect();
        convolve_line(&src, out, &kernel);
    });

    let mut transposed = vec![0.0f32; w * h];
    transposed.par_chunks_mut(h).enumerate().for_each(|(c, out)| {
        let src: Vec<f64> = (0..h).map(|r| horiz[r * w + c]).collect();
        let mut col = vec![0.0; h];
        convolve_line(&src, &mut col, &kernel);
        for (o, v) in out.iter_mut().zip(col) {
            *o = clamp_unit(v as f32);
        }
    });

    let mut data = vec![0.0f32; w * h];
    for c in 0..w {
        for r in 0..h {
            data[r * w + c] = transposed[c * h + r];
        }
    }
    Ok(GrayImage::from_raw(w, h, data))
}
