use std::cmp::Ordering;

use super::gray::GrayImage;
use super::histogram::{quantize, Histogram256, BINS};
use super::{check_len, ImgprocError};

/// Binary raster, row-major, every value exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImgprocError> {
        check_len(width, height, data.len())?;
        if let Some((index, &v)) = data.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(ImgprocError::OutOfRange {
                index,
                value: v as f64,
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c) as u8);
            }
        }
        Self { width, height, data }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![1; width * height],
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|&v| v <= 1));
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col] != 0
    }

    /// Out-of-bounds reads return `false` (background padding).
    #[inline]
    pub fn get_padded(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.data[row as usize * self.width + col as usize] != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.width + col] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn not(&self) -> Self {
        Self::from_raw(self.width, self.height, self.data.iter().map(|&v| 1 - v).collect())
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    /// Pointwise `self <= other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    fn zip(&self, other: &Self, f: impl Fn(u8, u8) -> u8) -> Self {
        assert_eq!((self.width, self.height), (other.width, other.height));
        Self::from_raw(
            self.width,
            self.height,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        )
    }
}

/// `1` where `g >= th`, else `0`.
pub fn threshold_fixed(g: &GrayImage, th: f32) -> BinaryMask {
    BinaryMask::from_raw(
        g.width(),
        g.height(),
        g.data().iter().map(|&v| (v >= th) as u8).collect(),
    )
}

/// Foreground iff the pixel's quantized bin is strictly above `bin`.
pub fn binarize_above_bin(g: &GrayImage, bin: u8) -> BinaryMask {
    BinaryMask::from_raw(
        g.width(),
        g.height(),
        g.data().iter().map(|&v| (quantize(v) > bin) as u8).collect(),
    )
}

/// Exact score `(N*S0 - n0*S)^2 / (n0*n1)`, which equals `N^2` times the
/// between-class variance `w0 w1 (mu0 - mu1)^2`. Kept as a fraction so
/// comparisons never round.
#[derive(Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

/// Compares `a/b` with `c/d` exactly, without overflow, by continued-fraction
/// expansion.
fn cmp_fraction(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    loop {
        let (qa, qc) = (a / b, c / d);
        if qa != qc {
            return qa.cmp(&qc);
        }
        let (ra, rc) = (a % b, c % d);
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            // ra/b vs rc/d  <=>  d/rc vs b/ra
            (false, false) => (a, b, c, d) = (d, rc, b, ra),
        }
    }
}

impl Score {
    fn cmp(&self, other: &Score) -> Ordering {
        cmp_fraction(self.num, self.den, other.num, other.den)
    }
}

/// Otsu's threshold: the bin `t` maximizing the between-class variance of the
/// split `{q <= t}` / `{q > t}`, smallest `t` on ties. Only splits leaving both
/// classes non-empty are candidates; a histogram with a single occupied bin
/// returns that bin.
///
/// Scores are compared as exact rationals, which holds for histograms of up
/// to `2^28` samples.
pub fn otsu_threshold(h: &Histogram256) -> Result<u8, ImgprocError> {
    let counts = h.counts();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ImgprocError::EmptyHistogram);
    }
    let sum_all: u128 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();
    let n = total as u128;

    let mut best: Option<(u8, Score)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for (t, &count) in counts.iter().enumerate().take(BINS - 1) {
        n0 += count as u128;
        s0 += t as u128 * count as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (n * s0).abs_diff(n0 * sum_all);
        let score = Score {
            num: diff * diff,
            den: n0 * n1,
        };
        match &best {
            Some((_, b)) if score.cmp(b) != Ordering::Greater => {}
            _ => best = Some((t as u8, score)),
        }
    }
    Ok(match best {
        Some((t, _)) => t,
        None => counts.iter().position(|&c| c > 0).unwrap() as u8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_threshold_examples() {
        let g = GrayImage::new(3, 1, vec![0.2, 0.5, 0.8]).unwrap();
        assert_eq!(threshold_fixed(&g, 0.5).data(), &[0, 1, 1]);
        assert_eq!(threshold_fixed(&g, 0.0).data(), &[1, 1, 1]);
        let g = GrayImage::new(3, 1, vec![0.2, 1.0, 0.999]).unwrap();
        assert_eq!(threshold_fixed(&g, 1.0).data(), &[0, 1, 0]);
    }

    #[test]
    fn empty_histogram_is_error() {
        assert_eq!(
            otsu_threshold(&Histogram256::default()),
            Err(ImgprocError::EmptyHistogram)
        );
    }

    #[test]
    fn single_bin_returns_that_bin() {
        let mut c = [0u64; 256];
        c[77] = 1234;
        assert_eq!(otsu_threshold(&Histogram256::from_counts(c)).unwrap(), 77);
    }

    #[test]
    fn two_spikes_split_at_smallest_tie() {
        let mut c = [0u64; 256];
        c[50] = 500;
        c[200] = 500;
        let t = otsu_threshold(&Histogram256::from_counts(c)).unwrap();
        assert!((50..200).contains(&t));
        assert_eq!(t, 50);
    }

    #[test]
    fn fraction_comparison() {
        assert_eq!(cmp_fraction(1, 3, 2, 6), Ordering::Equal);
        assert_eq!(cmp_fraction(2, 3, 3, 5), Ordering::Greater);
        assert_eq!(cmp_fraction(3, 5, 2, 3), Ordering::Less);
        assert_eq!(cmp_fraction(u128::MAX, 3, u128::MAX - 1, 3), Ordering::Greater);
        assert_eq!(cmp_fraction(355, 113, 22, 7), Ordering::Less);
        assert_eq!(cmp_fraction(0, 5, 0, 9), Ordering::Equal);
    }

    #[test]
    fn mask_validation() {
        assert!(BinaryMask::new(2, 1, vec![0, 2]).is_err());
        let m = BinaryMask::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        assert!(m.get_padded(0, 1));
        assert!(!m.get_padded(-1, 0));
        assert!(!m.get_padded(0, 2));
        assert_eq!(m.not().data(), &[1, 0, 0, 1]);
    }
}
