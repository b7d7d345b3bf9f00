//! Versioned JSON report. Every float is rounded to 6 decimals when the
//! report is built, so serialized output is stable and re-parses to an equal
//! value.

use serde::{Deserialize, Serialize};

use super::{ModuleDefects, ThermalStats};

pub const REPORT_VERSION: u32 = 1;

pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    // normalise -0.0 so equal reports print identically
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Healthy,
    Suspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramReport {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobReport {
    /// `[row, col]`
    pub centroid: [f64; 2],
    pub peak_c: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleReport {
    pub label: u32,
    pub n: usize,
    pub mean_c: f64,
    pub std_c: f64,
    pub threshold_c: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub histogram: HistogramReport,
    pub defect_fraction: f64,
    /// `[row, col]` pairs in raster order.
    pub defect_pixels: Vec<[usize; 2]>,
    pub blobs: Vec<BlobReport>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub module_count: usize,
    pub suspect_count: usize,
    pub suspect_labels: Vec<u32>,
    pub module_pixels: usize,
    pub defect_pixels: usize,
    pub defect_fraction: f64,
    pub max_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectReport {
    pub version: u32,
    pub thermogram_id: String,
    pub modules: Vec<ModuleReport>,
    pub summary: Summary,
}

impl ModuleReport {
    fn new(stats: &ThermalStats, defects: &ModuleDefects) -> Self {
        Self {
            label: defects.label,
            n: stats.n,
            mean_c: round6(stats.mean_c),
            std_c: round6(stats.std_c),
            threshold_c: round6(defects.threshold_c),
            min_c: round6(stats.min_c),
            max_c: round6(stats.max_c),
            histogram: HistogramReport {
                edges: stats.histogram.edges.iter().copied().map(round6).collect(),
                counts: stats.histogram.counts.clone(),
            },
            defect_fraction: round6(defects.defect_fraction),
            defect_pixels: defects.pixels.iter().map(|&(r, c)| [r, c]).collect(),
            blobs: defects
                .blobs
                .iter()
                .map(|b| BlobReport {
                    centroid: [round6(b.centroid.0), round6(b.centroid.1)],
                    peak_c: round6(b.peak_c),
                    size: b.size,
                })
                .collect(),
            verdict: defects.verdict,
        }
    }
}

impl DefectReport {
    pub(crate) fn assemble(thermogram_id: &str, entries: &[(ThermalStats, ModuleDefects)]) -> Self {
        let modules: Vec<ModuleReport> = entries.iter().map(|(s, d)| ModuleReport::new(s, d)).collect();
        let suspect_labels: Vec<u32> = modules
            .iter()
            .filter(|m| m.verdict == Verdict::Suspect)
            .map(|m| m.label)
            .collect();
        let module_pixels: usize = modules.iter().map(|m| m.n).sum();
        let defect_pixels: usize = modules.iter().map(|m| m.defect_pixels.len()).sum();
        let summary = Summary {
            module_count: modules.len(),
            suspect_count: suspect_labels.len(),
            suspect_labels,
            module_pixels,
            defect_pixels,
            defect_fraction: if module_pixels == 0 {
                0.0
            } else {
                round6(defect_pixels as f64 / module_pixels as f64)
            },
            max_c: modules.iter().map(|m| m.max_c).reduce(f64::max),
        };
        Self {
            version: REPORT_VERSION,
            thermogram_id: thermogram_id.to_string(),
            modules,
            summary,
        }
    }

    pub fn module(&self, label: u32) -> Option<&ModuleReport> {
        self.modules.iter().find(|m| m.label == label)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
