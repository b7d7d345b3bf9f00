//! Per-module temperature statistics and hot-spot detection.

mod report;

pub use report::{round6, BlobReport, DefectReport, HistogramReport, ModuleReport, Summary, Verdict, REPORT_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgproc::{connected_components, BinaryMask, Connectivity};
use crate::pipeline::SegmentationResult;
use crate::thermogram::Thermogram;

pub const DEFAULT_BINS: usize = 64;

/// Blob size separating noise from hot spots on the synthetic calibration
/// set (docs/calibration.md). Not the default: by default any defect pixel
/// marks a module suspect.
pub const CALIBRATED_MIN_BLOB_SIZE: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("shape mismatch: thermogram is {width}x{height}, segmentation is {seg_width}x{seg_height}")]
    ShapeMismatch {
        width: usize,
        height: usize,
        seg_width: usize,
        seg_height: usize,
    },
    #[error("module {0} has no pixels")]
    EmptyModule(u32),
    #[error("invalid analysis config: {0}")]
    InvalidConfig(String),
    #[error("pixel ({row}, {col}) outside the {width}x{height} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("module {0} not found")]
    LabelNotFound(u32),
}

impl AnalysisError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ShapeMismatch { .. } => "ShapeMismatch",
            Self::EmptyModule(_) => "EmptyModule",
            Self::InvalidConfig(_) => "InvalidConfig",
            Self::OutOfBounds { .. } => "OutOfBounds",
            Self::LabelNotFound(_) => "LabelNotFound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Histogram bins over `[min, max]` of each module.
    pub bins: usize,
    /// Smallest defect blob that marks a module suspect.
    pub min_blob_size: usize,
    /// Comparison mode: flag pixels above `mean + fixed_delta_c` instead of
    /// `mean + std`.
    pub fixed_delta_c: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            min_blob_size: 1,
            fixed_delta_c: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.bins < 2 {
            return Err(AnalysisError::InvalidConfig(format!("bins must be >= 2, got {}", self.bins)));
        }
        if self.min_blob_size == 0 {
            return Err(AnalysisError::InvalidConfig("min_blob_size must be >= 1".into()));
        }
        if let Some(d) = self.fixed_delta_c {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(AnalysisError::InvalidConfig(format!("fixed_delta_c must be finite and >= 0, got {d}")));
            }
        }
        Ok(())
    }
}

/// Temperatures of one module, in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleTemperatures {
    pub label: u32,
    pub samples: Vec<(usize, usize, f32)>,
}

impl ModuleTemperatures {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(_, _, t)| t as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureHistogram {
    /// `bins + 1` edges from min to max.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalStats {
    pub n: usize,
    pub mean_c: f64,
    /// Population standard deviation.
    pub std_c: f64,
    pub threshold_c: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub histogram: TemperatureHistogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// Mean `(row, col)` of the blob's pixels.
    pub centroid: (f64, f64),
    pub peak_c: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleDefects {
    pub label: u32,
    /// Temperature a pixel must exceed to count as defective.
    pub threshold_c: f64,
    /// Defect pixels `(row, col)` in raster order.
    pub pixels: Vec<(usize, usize)>,
    pub blobs: Vec<Blob>,
    pub defect_fraction: f64,
    pub verdict: Verdict,
}

pub fn query_temperature(t: &Thermogram, row: usize, col: usize) -> Result<f32, AnalysisError> {
    if row >= t.height() || col >= t.width() {
        return Err(AnalysisError::OutOfBounds {
            row,
            col,
            width: t.width(),
            height: t.height(),
        });
    }
    Ok(t.temperature().get(row, col))
}

/// Collects `T(i, j)` under each module label, ordered by label.
pub fn extract_module_temperatures(
    t: &Thermogram,
    seg: &SegmentationResult,
) -> Result<Vec<ModuleTemperatures>, AnalysisError> {
    let labels = &seg.labels;
    if (labels.width(), labels.height()) != (t.width(), t.height()) {
        return Err(AnalysisError::ShapeMismatch {
            width: t.width(),
            height: t.height(),
            seg_width: labels.width(),
            seg_height: labels.height(),
        });
    }
    let n = labels.label_count() as usize;
    let mut modules: Vec<ModuleTemperatures> = (1..=n as u32)
        .map(|label| ModuleTemperatures {
            label,
            samples: Vec::new(),
        })
        .collect();
    let temps = t.temperature();
    for r in 0..labels.height() {
        for c in 0..labels.width() {
            let l = labels.get(r, c) as usize;
            if l > 0 {
                modules[l - 1].samples.push((r, c, temps.get(r, c)));
            }
        }
    }
    modules.retain(|m| !m.samples.is_empty());
    Ok(modules)
}

pub fn module_stats(mt: &ModuleTemperatures, bins: usize) -> Result<ThermalStats, AnalysisError> {
    if bins < 2 {
        return Err(AnalysisError::InvalidConfig(format!("bins must be >= 2, got {bins}")));
    }
    let n = mt.samples.len();
    if n == 0 {
        return Err(AnalysisError::EmptyModule(mt.label));
    }
    let mean = mt.values().sum::<f64>() / n as f64;
    let var = mt.values().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let (min, max) = mt
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    Ok(ThermalStats {
        n,
        mean_c: mean,
        std_c: std,
        threshold_c: mean + std,
        min_c: min,
        max_c: max,
        histogram: temperature_histogram(mt.values(), min, max, bins),
    })
}

fn temperature_histogram(values: impl Iterator<Item = f64>, min: f64, max: f64, bins: usize) -> TemperatureHistogram {
    let span = max - min;
    let edges = (0..=bins).map(|i| min + span * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for t in values {
        let i = if span > 0.0 {
            // last bin is closed on the right
            (((t - min) / span * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    TemperatureHistogram { edges, counts }
}

/// Pixels hotter than the threshold, grouped into 8-connected blobs.
pub fn detect_defects(mt: &ModuleTemperatures, stats: &ThermalStats, cfg: &AnalysisConfig) -> ModuleDefects {
    let threshold = match cfg.fixed_delta_c {
        Some(d) => stats.mean_c + d,
        None => stats.threshold_c,
    };
    let hot: Vec<(usize, usize, f32)> = mt
        .samples
        .iter()
        .copied()
        .filter(|&(_, _, t)| t as f64 > threshold)
        .collect();
    let blobs = blobs_of(&hot);
    let suspect = blobs.iter().any(|b| b.size >= cfg.min_blob_size);
    ModuleDefects {
        label: mt.label,
        threshold_c: threshold,
        defect_fraction: hot.len() as f64 / mt.samples.len() as f64,
        pixels: hot.iter().map(|&(r, c, _)| (r, c)).collect(),
        blobs,
        verdict: if suspect { Verdict::Suspect } else { Verdict::Healthy },
    }
}

fn blobs_of(hot: &[(usize, usize, f32)]) -> Vec<Blob> {
    if hot.is_empty() {
        return Vec::new();
    }
    let r0 = hot.iter().map(|p| p.0).min().unwrap();
    let r1 = hot.iter().map(|p| p.0).max().unwrap();
    let c0 = hot.iter().map(|p| p.1).min().unwrap();
    let c1 = hot.iter().map(|p| p.1).max().unwrap();
    let (w, h) = (c1 - c0 + 1, r1 - r0 + 1);
    let mut mask = BinaryMask::zeros(w, h);
    for &(r, c, _) in hot {
        mask.set(r - r0, c - c0, true);
    }
    let cc = connected_components(&mask, Connectivity::Eight);
    let mut acc = vec![(0f64, 0f64, f64::NEG_INFINITY, 0usize); cc.label_count() as usize];
    for &(r, c, t) in hot {
        let a = &mut acc[cc.get(r - r0, c - c0) as usize - 1];
        a.0 += r as f64;
        a.1 += c as f64;
        a.2 = a.2.max(t as f64);
        a.3 += 1;
    }
    acc.into_iter()
        .map(|(sr, sc, peak, size)| Blob {
            centroid: (sr / size as f64, sc / size as f64),
            peak_c: peak,
            size,
        })
        .collect()
}

/// Per-module statistics and defects for a segmented thermogram.
pub fn analyze(t: &Thermogram, seg: &SegmentationResult, cfg: &AnalysisConfig) -> Result<DefectReport, AnalysisError> {
    cfg.validate()?;
    let modules = extract_module_temperatures(t, seg)?;
    let entries = modules
        .par_iter()
        .map(|mt| {
            let stats = module_stats(mt, cfg.bins)?;
            let defects = detect_defects(mt, &stats, cfg);
            Ok((stats, defects))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(DefectReport::assemble(t.id(), &entries))
}
