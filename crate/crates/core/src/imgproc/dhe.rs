//! Dynamic histogram equalization.
//!
//! The global histogram is smoothed, cut at its local minima into
//! sub-histograms, and each sub-histogram is equalized inside its own gray
//! range. Because every partition's output range is proportional to its
//! input span and the spans tile all 256 bins, a partition `[lo, hi]` is
//! mapped onto `[lo/255, hi/255]`. The overall mapping is therefore
//! monotone and never moves mass across a valley.

use super::gray::GrayImage;
use super::histogram::{equalization_lut, histogram, quantize, Histogram256, BINS};
use super::{invalid, ImgprocError};

/// Inclusive bin range `[lo, hi]`.
pub type Partition = (u8, u8);

pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;
pub const DEFAULT_MIN_PARTITION_SPAN: usize = 8;

fn validate(smoothing_window: usize, min_partition_span: usize) -> Result<(), ImgprocError> {
    if smoothing_window == 0 || smoothing_window % 2 == 0 {
        return Err(invalid(
            "smoothing_window",
            format!("must be odd and >= 1, got {smoothing_window}"),
        ));
    }
    if !(1..=BINS).contains(&min_partition_span) {
        return Err(invalid(
            "min_partition_span",
            format!("must be in 1..=256, got {min_partition_span}"),
        ));
    }
    Ok(())
}

/// Centered moving average; windows are truncated at the histogram ends.
pub(crate) fn smooth(counts: &[u64; BINS], window: usize) -> [f64; BINS] {
    let half = window / 2;
    let mut out = [0.0; BINS];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(BINS - 1);
        let sum: u64 = counts[lo..=hi].iter().sum();
        *o = sum as f64 / (hi - lo + 1) as f64;
    }
    out
}

/// Split points of a smoothed histogram: for each strict local minimum the
/// split bin is the minimum itself; a flat valley (a run of equal values with
/// strictly higher neighbours on both sides) splits at the run's midpoint.
/// A partition ends at its split bin inclusive.
fn local_minima(smoothed: &[f64; BINS]) -> Vec<usize> {
    let mut splits = Vec::new();
    let mut i = 1;
    while i < BINS - 1 {
        let v = smoothed[i];
        if smoothed[i - 1] > v {
            let mut j = i;
            while j + 1 < BINS && smoothed[j + 1] == v {
                j += 1;
            }
            if j + 1 < BINS && smoothed[j + 1] > v {
                splits.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    splits
}

fn span(p: Partition) -> usize {
    p.1 as usize - p.0 as usize + 1
}

/// Partitions used by [`dhe`], after merging spans narrower than
/// `min_partition_span` into their narrower neighbour (ties go left).
pub fn dhe_partitions(
    hist: &Histogram256,
    smoothing_window: usize,
    min_partition_span: usize,
) -> Result<Vec<Partition>, ImgprocError> {
    validate(smoothing_window, min_partition_span)?;
    let smoothed = smooth(hist.counts(), smoothing_window);
    let mut parts = Vec::new();
    let mut lo = 0usize;
    for s in local_minima(&smoothed) {
        parts.push((lo as u8, s as u8));
        lo = s + 1;
    }
    parts.push((lo as u8, (BINS - 1) as u8));

    while parts.len() > 1 {
        let Some(idx) = parts.iter().position(|&p| span(p) < min_partition_span) else {
            break;
        };
        let target = if idx == 0 {
            1
        } else if idx == parts.len() - 1 || span(parts[idx - 1]) <= span(parts[idx + 1]) {
            idx - 1
        } else {
            idx + 1
        };
        let (a, b) = (idx.min(target), idx.max(target));
        parts[a] = (parts[a].0, parts[b].1);
        parts.remove(b);
    }
    Ok(parts)
}

/// Builds the full 256-entry DHE lookup. A partition holding a single
/// occupied bin (or none) maps onto its floor.
fn dhe_lut(hist: &Histogram256, parts: &[Partition]) -> Vec<f32> {
    let mut lut = vec![0.0f32; BINS];
    for &(lo, hi) in parts {
        let (lo, hi) = (lo as usize, hi as usize);
        let floor = lo as f32 / 255.0;
        let range = (hi - lo) as f32 / 255.0;
        match equalization_lut(&hist.counts()[lo..=hi]) {
            Some(sub) => {
                for (k, m) in sub.into_iter().enumerate() {
                    lut[lo + k] = (floor + range * m).min(1.0);
                }
            }
            None => lut[lo..=hi].iter_mut().for_each(|v| *v = floor),
        }
    }
    lut
}

/// Dynamic histogram equalization. A constant image is returned unchanged.
pub fn dhe(
    g: &GrayImage,
    smoothing_window: usize,
    min_partition_span: usize,
) -> Result<GrayImage, ImgprocError> {
    let hist = histogram(g);
    let parts = dhe_partitions(&hist, smoothing_window, min_partition_span)?;
    if hist.occupied_bins() <= 1 {
        return Ok(g.clone());
    }
    let lut = dhe_lut(&hist, &parts);
    Ok(GrayImage::from_raw(
        g.width(),
        g.height(),
        g.data().iter().map(|&v| lut[quantize(v) as usize]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::histogram::global_equalize;

    /// Image whose histogram is exactly `counts` (pixels sit on bin centres).
    fn image_from_counts(counts: &[u64; BINS]) -> GrayImage {
        let data: Vec<f32> = counts
            .iter()
            .enumerate()
            .flat_map(|(b, &c)| std::iter::repeat_n(b as f32 / 255.0, c as usize))
            .collect();
        let n = data.len();
        GrayImage::new(n, 1, data).unwrap()
    }

    fn gaussian_counts(modes: &[(f64, f64, f64)]) -> [u64; BINS] {
        let mut counts = [0u64; BINS];
        for (b, c) in counts.iter_mut().enumerate() {
            let v: f64 = modes
                .iter()
                .map(|&(mu, sd, mass)| mass * (-(b as f64 - mu).powi(2) / (2.0 * sd * sd)).exp())
                .sum();
            *c = v.round() as u64;
        }
        counts
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = GrayImage::filled(4, 4, 0.5);
        assert!(dhe(&g, 4, 8).is_err());
        assert!(dhe(&g, 0, 8).is_err());
        assert!(dhe(&g, 5, 0).is_err());
        assert!(dhe(&g, 5, 257).is_err());
    }

    #[test]
    fn constant_image_is_unchanged() {
        let g = GrayImage::filled(6, 3, 0.4213);
        assert_eq!(dhe(&g, 5, 8).unwrap(), g);
    }

    #[test]
    fn unimodal_matches_global_equalization() {
        let counts = gaussian_counts(&[(120.0, 25.0, 300.0)]);
        let g = image_from_counts(&counts);
        let parts = dhe_partitions(&histogram(&g), 5, 8).unwrap();
        assert_eq!(parts, vec![(0, 255)]);
        let a = dhe(&g, 5, 8).unwrap();
        let b = global_equalize(&g);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn bimodal_splits_between_modes() {
        let counts = gaussian_counts(&[(60.0, 10.0, 400.0), (190.0, 12.0, 300.0)]);
        let hist = Histogram256::from_counts(counts);
        let parts = dhe_partitions(&hist, 5, 8).unwrap();
        assert_eq!(parts.len(), 2);
        let split = parts[0].1 as usize;
        assert!(split > 60 && split < 190);

        // brute force: the smoothed valley between the modes
        let sm = smooth(&counts, 5);
        let min_v = (61..190).map(|i| sm[i]).fold(f64::INFINITY, f64::min);
        let run: Vec<usize> = (61..190).filter(|&i| sm[i] == min_v).collect();
        assert!(run.contains(&split));
    }

    #[test]
    fn mapping_is_monotone() {
        let counts = gaussian_counts(&[(30.0, 6.0, 100.0), (110.0, 9.0, 200.0), (220.0, 5.0, 80.0)]);
        let g = image_from_counts(&counts);
        let hist = histogram(&g);
        let parts = dhe_partitions(&hist, 5, 8).unwrap();
        assert!(parts.len() >= 2);
        let lut = dhe_lut(&hist, &parts);
        assert!(lut.windows(2).all(|w| w[0] <= w[1]));
        // partitions stay inside their own gray range
        for &(lo, hi) in &parts {
            for q in lo..=hi {
                let v = lut[q as usize];
                assert!(v >= lo as f32 / 255.0 - 1e-6 && v <= hi as f32 / 255.0 + 1e-6);
            }
        }
    }

    #[test]
    fn narrow_partitions_merge() {
        let mut counts = [0u64; BINS];
        // spike pattern producing many tiny valleys
        for b in (0..BINS).step_by(4) {
            counts[b] = 50;
        }
        let hist = Histogram256::from_counts(counts);
        let parts = dhe_partitions(&hist, 1, 16).unwrap();
        assert!(parts.iter().all(|&p| span(p) >= 16) || parts.len() == 1);
        assert_eq!(parts.first().unwrap().0, 0);
        assert_eq!(parts.last().unwrap().1, 255);
        assert!(parts.windows(2).all(|w| w[0].1 as usize + 1 == w[1].0 as usize));
    }
}
