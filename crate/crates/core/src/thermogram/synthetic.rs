//! Synthetic PV-array thermograms with exact ground truth.
//!
//! Modules are laid out on a regular grid of dark rectangles over a brighter
//! background. Temperatures are a base value per class plus Gaussian-profile
//! hot spots and i.i.d. normal noise. A hot spot of amplitude `delta_c` and
//! radius `r` contributes `delta_c * 0.5^(d^2 / r^2)` at distance `d` from its
//! centre, so its ground-truth defect disk (contribution above half the
//! amplitude) is exactly the set of pixels with `d < r`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{TemperatureMatrix, Thermogram, ThermogramError, VisualImage};
use crate::imgproc::{BinaryMask, LabelMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotSpot {
    /// Row-major module index in the grid.
    pub module: usize,
    /// Centre relative to the module's top-left corner, in pixels.
    pub row: f64,
    pub col: f64,
    pub radius: f64,
    pub delta_c: f64,
}

/// Output window applied after rendering (for partial-module scenes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crop {
    pub row: usize,
    pub col: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub module_width: usize,
    pub module_height: usize,
    pub gap: usize,
    /// Background border around the grid.
    pub margin: usize,
    pub background_c: f64,
    pub module_c: f64,
    #[serde(default)]
    pub hot_spots: Vec<HotSpot>,
    #[serde(default)]
    pub noise_std_c: f64,
    pub seed: u64,
    #[serde(default)]
    pub crop: Option<Crop>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            rows: 2,
            cols: 3,
            module_width: 48,
            module_height: 32,
            gap: 6,
            margin: 12,
            background_c: 20.0,
            module_c: 35.0,
            hot_spots: Vec::new(),
            noise_std_c: 0.0,
            seed: 0,
            crop: None,
        }
    }
}

/// Pixel rectangle of one module in the uncropped layout, end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleRect {
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

impl ModuleRect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row0..self.row1).contains(&row) && (self.col0..self.col1).contains(&col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    /// Module `k` (row-major) carries label `k + 1`.
    pub modules: LabelMap,
    pub defects: BinaryMask,
    /// Module rectangles in output (post-crop) coordinates; modules cut away
    /// entirely are `None`.
    pub rects: Vec<Option<ModuleRect>>,
}

impl SyntheticSpec {
    pub fn image_size(&self) -> (usize, usize) {
        let w = 2 * self.margin + self.cols * self.module_width + self.cols.saturating_sub(1) * self.gap;
        let h = 2 * self.margin + self.rows * self.module_height + self.rows.saturating_sub(1) * self.gap;
        (w, h)
    }

    pub fn module_rect(&self, index: usize) -> ModuleRect {
        let (r, c) = (index / self.cols, index % self.cols);
        let row0 = self.margin + r * (self.module_height + self.gap);
        let col0 = self.margin + c * (self.module_width + self.gap);
        ModuleRect {
            row0,
            col0,
            row1: row0 + self.module_height,
            col1: col0 + self.module_width,
        }
    }

    pub fn validate(&self) -> Result<(), ThermogramError> {
        let bad = |m: String| Err(ThermogramError::SpecInvalid(m));
        if self.module_width == 0 || self.module_height == 0 {
            return bad("module size must be positive".into());
        }
        let (w, h) = self.image_size();
        if w == 0 || h == 0 {
            return bad("empty image".into());
        }
        for (name, v) in [("background_c", self.background_c), ("module_c", self.module_c)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.noise_std_c < 0.0 || !self.noise_std_c.is_finite() {
            return bad("noise_std_c must be finite and >= 0".into());
        }
        let n = self.rows * self.cols;
        for (i, s) in self.hot_spots.iter().enumerate() {
            if s.module >= n {
                return bad(format!("hot spot {i}: module {} out of range 0..{n}", s.module));
            }
            if s.delta_c <= 0.0 || !s.delta_c.is_finite() {
                return bad(format!("hot spot {i}: delta_c must be > 0"));
            }
            if s.radius <= 0.0 || !s.radius.is_finite() {
                return bad(format!("hot spot {i}: radius must be > 0"));
            }
            if !(s.row >= 0.0 && s.row < self.module_height as f64 && s.col >= 0.0 && s.col < self.module_width as f64) {
                return bad(format!("hot spot {i}: centre ({}, {}) outside its module", s.row, s.col));
            }
        }
        if let Some(c) = self.crop {
            if c.width == 0 || c.height == 0 || c.row + c.height > h || c.col + c.width > w {
                return bad(format!("crop {c:?} outside the {w}x{h} image"));
            }
        }
        Ok(())
    }
}

/// Module (dark) and background (bright) intensity as a function of the
/// local temperature excess.
fn module_shade(excess: f64) -> f64 {
    (0.22 + 0.01 * excess).clamp(0.05, 0.5)
}

fn background_shade(excess: f64) -> f64 {
    (0.72 + 0.02 * excess).clamp(0.55, 0.95)
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Thermogram, SyntheticTruth), ThermogramError> {
    spec.validate()?;
    let (w, h) = spec.image_size();
    let n_modules = spec.rows * spec.cols;
    let rects: Vec<ModuleRect> = (0..n_modules).map(|k| spec.module_rect(k)).collect();

    let mut labels = vec![0u32; w * h];
    for (k, rect) in rects.iter().enumerate() {
        for r in rect.row0..rect.row1 {
            labels[r * w + rect.col0..r * w + rect.col1].fill(k as u32 + 1);
        }
    }

    // noiseless hot-spot field and defect mask
    let mut excess = vec![0.0f64; w * h];
    let mut defects = vec![0u8; w * h];
    for spot in &spec.hot_spots {
        let rect = rects[spot.module];
        let (cr, cc) = (rect.row0 as f64 + spot.row, rect.col0 as f64 + spot.col);
        for r in rect.row0..rect.row1 {
            for c in rect.col0..rect.col1 {
                let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
                let contribution = spot.delta_c * 0.5f64.powf(d2 / (spot.radius * spot.radius));
                excess[r * w + c] += contribution;
                if contribution > spot.delta_c / 2.0 {
                    defects[r * w + c] = 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std_c).expect("validated std");
    let mut temps = Vec::with_capacity(w * h);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        let n = if spec.noise_std_c > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        if labels[i] > 0 {
            let t = spec.module_c + excess[i] + n;
            let s = module_shade(t - spec.module_c);
            temps.push(t as f32);
            rgb.extend_from_slice(&[to_u8(0.8 * s), to_u8(0.9 * s), to_u8(1.2 * s)]);
        } else {
            let t = spec.background_c + n;
            let s = background_shade(t - spec.background_c);
            temps.push(t as f32);
            rgb.extend_from_slice(&[to_u8(1.05 * s), to_u8(s), to_u8(0.85 * s)]);
        }
    }

    let meta = BTreeMap::from([
        ("camera".to_string(), "synthetic".to_string()),
        ("seed".to_string(), spec.seed.to_string()),
    ]);
    let thermogram = Thermogram::new(
        format!("synthetic-{}", spec.seed),
        VisualImage::from_rgb8(w, h, &rgb)?,
        TemperatureMatrix::new(w, h, temps)?,
        meta,
    )?;
    let modules = LabelMap::new(w, h, labels, n_modules as u32).expect("labels within count");
    let defects = BinaryMask::new(w, h, defects).expect("binary");
    let truth = SyntheticTruth {
        modules,
        defects,
        rects: rects.into_iter().map(Some).collect(),
    };

    match spec.crop {
        None => Ok((thermogram, truth)),
        Some(c) => {
            let t = thermogram.crop(c.row, c.col, c.width, c.height)?;
            let crop_labels: Vec<u32> = (c.row..c.row + c.height)
                .flat_map(|r| truth.modules.data()[r * w + c.col..r * w + c.col + c.width].to_vec())
                .collect();
            let crop_defects: Vec<u8> = (c.row..c.row + c.height)
                .flat_map(|r| truth.defects.data()[r * w + c.col..r * w + c.col + c.width].to_vec())
                .collect();
            let rects = truth
                .rects
                .iter()
                .map(|rect| {
                    let rect = rect.expect("uncropped");
                    let row0 = rect.row0.max(c.row);
                    let col0 = rect.col0.max(c.col);
                    let row1 = rect.row1.min(c.row + c.height);
                    let col1 = rect.col1.min(c.col + c.width);
                    (row0 < row1 && col0 < col1).then(|| ModuleRect {
                        row0: row0 - c.row,
                        col0: col0 - c.col,
                        row1: row1 - c.row,
                        col1: col1 - c.col,
                    })
                })
                .collect();
            Ok((
                t,
                SyntheticTruth {
                    modules: LabelMap::new(c.width, c.height, crop_labels, n_modules as u32).expect("labels"),
                    defects: BinaryMask::new(c.width, c.height, crop_defects).expect("binary"),
                    rects,
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermogram::save_thermogram;

    fn spot(module: usize, delta_c: f64) -> HotSpot {
        HotSpot {
            module,
            row: 14.0,
            col: 20.0,
            radius: 5.0,
            delta_c,
        }
    }

    #[test]
    fn no_spots_no_defects() {
        let (t, truth) = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(truth.defects.count_ones(), 0);
        assert_eq!(truth.modules.label_count(), 6);
        let (w, h) = SyntheticSpec::default().image_size();
        assert_eq!((t.width(), t.height()), (w, h));
    }

    #[test]
    fn defect_confined_to_target_module() {
        let spec = SyntheticSpec {
            rows: 1,
            cols: 2,
            hot_spots: vec![spot(0, 10.0)],
            ..Default::default()
        };
        let (_, truth) = generate_synthetic(&spec).unwrap();
        let rect = spec.module_rect(0);
        assert!(truth.defects.count_ones() > 0);
        for r in 0..truth.defects.height() {
            for c in 0..truth.defects.width() {
                if truth.defects.get(r, c) {
                    assert!(rect.contains(r, c));
                    assert_eq!(truth.modules.get(r, c), 1);
                }
            }
        }
        // disk of radius 5 around the centre (d < r)
        let expected = (0..spec.module_height)
            .flat_map(|r| (0..spec.module_width).map(move |c| (r, c)))
            .filter(|&(r, c)| (r as f64 - 14.0).powi(2) + (c as f64 - 20.0).powi(2) < 25.0)
            .count();
        assert_eq!(truth.defects.count_ones(), expected);
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        let spec = SyntheticSpec {
            seed: 42,
            noise_std_c: 0.5,
            hot_spots: vec![spot(3, 7.0)],
            ..Default::default()
        };
        let (a, ta) = generate_synthetic(&spec).unwrap();
        let (b, tb) = generate_synthetic(&spec).unwrap();
        assert_eq!(save_thermogram(&a).unwrap(), save_thermogram(&b).unwrap());
        assert_eq!(ta, tb);
        let other = SyntheticSpec { seed: 43, ..spec };
        assert_ne!(generate_synthetic(&other).unwrap().0, a);
    }

    #[test]
    fn defect_pixels_are_hotter_than_healthy_module_pixels() {
        let spec = SyntheticSpec {
            hot_spots: vec![spot(1, 4.0), spot(4, 12.0)],
            ..Default::default()
        };
        let (t, truth) = generate_synthetic(&spec).unwrap();
        let (mut hot, mut nh, mut cold, mut nc) = (0.0, 0, 0.0, 0);
        for i in 0..t.temperature().data().len() {
            let v = t.temperature().data()[i] as f64;
            if truth.defects.data()[i] == 1 {
                hot += v;
                nh += 1;
            } else if truth.modules.data()[i] > 0 {
                cold += v;
                nc += 1;
            }
        }
        assert!(hot / nh as f64 > cold / nc as f64);
    }

    #[test]
    fn invalid_specs_rejected() {
        let cases = [
            SyntheticSpec { hot_spots: vec![spot(6, 5.0)], ..Default::default() },
            SyntheticSpec { hot_spots: vec![spot(0, 0.0)], ..Default::default() },
            SyntheticSpec {
                hot_spots: vec![HotSpot { row: 40.0, ..spot(0, 3.0) }],
                ..Default::default()
            },
            SyntheticSpec { noise_std_c: -1.0, ..Default::default() },
            SyntheticSpec { module_width: 0, ..Default::default() },
            SyntheticSpec {
                crop: Some(Crop { row: 0, col: 0, width: 10_000, height: 5 }),
                ..Default::default()
            },
        ];
        for spec in cases {
            assert_eq!(generate_synthetic(&spec).unwrap_err().kind(), "SpecInvalid");
        }
    }

    #[test]
    fn crop_cuts_modules() {
        let spec = SyntheticSpec {
            rows: 1,
            cols: 2,
            crop: Some(Crop { row: 0, col: 0, width: 12 + 48 + 6 + 24, height: 56 }),
            ..Default::default()
        };
        let (t, truth) = generate_synthetic(&spec).unwrap();
        assert_eq!(t.width(), 90);
        let r1 = truth.rects[1].unwrap();
        assert_eq!((r1.col0, r1.col1), (66, 90));
        assert_eq!(truth.modules.get(20, 89), 2);
    }

    #[test]
    fn empty_scene() {
        let spec = SyntheticSpec { rows: 0, cols: 0, margin: 20, ..Default::default() };
        let (t, truth) = generate_synthetic(&spec).unwrap();
        assert_eq!((t.width(), t.height()), (40, 40));
        assert!(truth.modules.data().iter().all(|&l| l == 0));
    }

    #[test]
    fn spec_json_rejects_unknown_keys() {
        let json = serde_json::to_string(&SyntheticSpec::default()).unwrap();
        assert!(serde_json::from_str::<SyntheticSpec>(&json).is_ok());
        let bad = json.replace("\"seed\"", "\"sed\"");
        assert!(serde_json::from_str::<SyntheticSpec>(&bad).is_err());
    }
}
