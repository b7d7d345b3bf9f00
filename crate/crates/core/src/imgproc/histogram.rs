use serde::{Deserialize, Serialize};

use super::gray::GrayImage;

pub const BINS: usize = 256;

/// Quantizes an intensity in `[0, 1]` to its 8-bit bin, `floor(255 v + 0.5)`.
#[inline]
pub fn quantize(v: f32) -> u8 {
    let q = (255.0 * v as f64 + 0.5).floor();
    q.clamp(0.0, 255.0) as u8
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram256 {
    #[serde(with = "counts_serde")]
    counts: [u64; BINS],
}

impl Default for Histogram256 {
    fn default() -> Self {
        Self { counts: [0; BINS] }
    }
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; BINS]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64; BINS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, v: f32) {
        self.counts[quantize(v) as usize] += 1;
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub fn histogram(g: &GrayImage) -> Histogram256 {
    let mut h = Histogram256::default();
    for &v in g.data() {
        h.add(v);
    }
    h
}

/// CDF equalization lookup over `counts`, mapping the first occupied bin to 0
/// and the last to 1: `(cdf(q) - cdf_min) / (N - cdf_min)`.
///
/// Returns `None` when fewer than two bins are occupied.
pub(crate) fn equalization_lut(counts: &[u64]) -> Option<Vec<f32>> {
    let total: u64 = counts.iter().sum();
    let first = counts.iter().position(|&c| c > 0)?;
    let cdf_min = counts[first];
    if total == cdf_min {
        return None;
    }
    let denom = (total - cdf_min) as f64;
    let mut cdf = 0u64;
    Some(
        counts
            .iter()
            .map(|&c| {
                cdf += c;
                (cdf.saturating_sub(cdf_min) as f64 / denom) as f32
            })
            .collect(),
    )
}

/// Plain global histogram equalization. A constant image is returned as is.
pub fn global_equalize(g: &GrayImage) -> GrayImage {
    let h = histogram(g);
    match equalization_lut(h.counts()) {
        Some(lut) => GrayImage::from_raw(
            g.width(),
            g.height(),
            g.data().iter().map(|&v| lut[quantize(v) as usize]).collect(),
        ),
        None => g.clone(),
    }
}

mod counts_serde {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(counts: &[u64; 256], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(counts.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u64; 256], D::Error> {
        let v = Vec::<u64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<u64>| D::Error::invalid_length(v.len(), &"256 bins"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(1.0 / 255.0), 1);
    }

    #[test]
    fn uniform_half_lands_in_bin_128() {
        let g = GrayImage::filled(7, 5, 0.5);
        let h = histogram(&g);
        assert_eq!(h.counts()[128], 35);
        assert_eq!(h.occupied_bins(), 1);
    }

    #[test]
    fn empty_image_has_empty_histogram() {
        let g = GrayImage::new(0, 0, vec![]).unwrap();
        assert_eq!(histogram(&g).total(), 0);
    }

    #[test]
    fn counts_sum_to_pixel_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
            let data = (0..w * h).map(|_| rng.random::<f32>()).collect();
            let g = GrayImage::new(w, h, data).unwrap();
            let hist = histogram(&g);
            let mut oracle = [0u64; 256];
            for &v in g.data() {
                oracle[((v as f64) * 255.0 + 0.5).floor() as usize] += 1;
            }
            assert_eq!(hist.counts(), &oracle);
            assert_eq!(hist.total(), (w * h) as u64);
        }
    }

    #[test]
    fn global_equalization_spans_unit_range() {
        let data = vec![0.2, 0.2, 0.4, 0.6];
        let g = GrayImage::new(2, 2, data).unwrap();
        let e = global_equalize(&g);
        assert_eq!(e.data(), &[0.0, 0.0, 0.5, 1.0]);
        let c = GrayImage::filled(3, 3, 0.3);
        assert_eq!(global_equalize(&c), c);
    }
}
