//! JSON documents written by the CLI and served by the HTTP API. Both sides
//! build them here so their bytes agree.

use serde::Serialize;
use thermoscan_core::analysis::{DefectReport, ModuleReport};
use thermoscan_core::pipeline::{ModuleRegion, PipelineConfig, SegmentationResult};
use thermoscan_core::Thermogram;

#[derive(Debug, Serialize)]
pub struct RegionsDoc<'a> {
    pub thermogram_id: &'a str,
    pub width: usize,
    pub height: usize,
    pub otsu_bin: u8,
    pub module_count: usize,
    pub config: &'a PipelineConfig,
    pub regions: &'a [ModuleRegion],
}

impl<'a> RegionsDoc<'a> {
    pub fn new(t: &'a Thermogram, seg: &'a SegmentationResult) -> Self {
        Self {
            thermogram_id: t.id(),
            width: t.width(),
            height: t.height(),
            otsu_bin: seg.otsu_bin,
            module_count: seg.regions.len(),
            config: &seg.config,
            regions: &seg.regions,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HistogramDoc<'a> {
    pub label: u32,
    pub edges: &'a [f64],
    pub counts: &'a [u64],
    pub mean_c: f64,
    pub std_c: f64,
    pub threshold_c: f64,
}

impl<'a> From<&'a ModuleReport> for HistogramDoc<'a> {
    fn from(m: &'a ModuleReport) -> Self {
        Self {
            label: m.label,
            edges: &m.histogram.edges,
            counts: &m.histogram.counts,
            mean_c: m.mean_c,
            std_c: m.std_c,
            threshold_c: m.threshold_c,
        }
    }
}

pub fn histograms(report: &DefectReport) -> Vec<HistogramDoc<'_>> {
    report.modules.iter().map(HistogramDoc::from).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("document serializes");
    out.push(b'\n');
    out
}
