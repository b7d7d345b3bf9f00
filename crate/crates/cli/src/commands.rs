//! Batch commands. Each reads its inputs, runs the core library and writes
//! a fixed set of files into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thermoscan_core::analysis::{analyze as run_analysis, AnalysisConfig, DefectReport};
use thermoscan_core::imgproc::dump;
use thermoscan_core::pipeline::{segment as run_segment, PipelineConfig, SegmentationResult};
use thermoscan_core::render;
use thermoscan_core::thermogram::{generate_synthetic, ModuleRect, SyntheticSpec, ThermogramError};
use thermoscan_core::{load_thermogram, save_thermogram, Thermogram};

use crate::error::CliError;
use crate::output::{histograms, to_json_bytes, RegionsDoc};

pub const THERMOGRAM_FILE: &str = "thermogram.tgrm";
pub const TRUTH_LABELS_FILE: &str = "truth_labels.png";
pub const TRUTH_DEFECTS_FILE: &str = "truth_defects.png";
pub const TRUTH_FILE: &str = "truth.json";
pub const LABELS_FILE: &str = "labels.png";
pub const BOUNDARIES_FILE: &str = "boundaries.png";
pub const REGIONS_FILE: &str = "regions.json";
pub const REPORT_FILE: &str = "report.json";
pub const OVERLAY_FILE: &str = "overlay.png";
pub const HISTOGRAMS_FILE: &str = "histograms.json";

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn load_input(path: &Path) -> Result<Thermogram, CliError> {
    Ok(load_thermogram(&read(path)?)?)
}

pub fn load_pipeline_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    PipelineConfig::from_json(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[derive(Serialize)]
struct TruthDoc<'a> {
    thermogram_id: &'a str,
    modules: Vec<Option<ModuleRect>>,
    defect_pixels: usize,
}

/// Materializes a synthetic spec (JSON) as a TGRM file plus ground truth.
pub fn synth(spec_path: &Path, out: &Path) -> Result<Thermogram, CliError> {
    let text = fs::read_to_string(spec_path).map_err(|e| CliError::io(spec_path, e))?;
    let spec: SyntheticSpec =
        serde_json::from_str(&text).map_err(|e| ThermogramError::SpecInvalid(e.to_string()))?;
    let (t, truth) = generate_synthetic(&spec)?;
    ensure_dir(out)?;
    write(out, THERMOGRAM_FILE, &save_thermogram(&t)?)?;
    write(out, TRUTH_LABELS_FILE, &dump::labels_to_png16(&truth.modules)?)?;
    write(out, TRUTH_DEFECTS_FILE, &dump::mask_to_png(&truth.defects)?)?;
    let doc = TruthDoc {
        thermogram_id: t.id(),
        modules: truth.rects.clone(),
        defect_pixels: truth.defects.count_ones(),
    };
    write(out, TRUTH_FILE, &to_json_bytes(&doc))?;
    Ok(t)
}

fn write_segmentation(t: &Thermogram, seg: &SegmentationResult, out: &Path) -> Result<(), CliError> {
    write(out, LABELS_FILE, &dump::labels_to_png16(&seg.labels)?)?;
    write(out, BOUNDARIES_FILE, &render::overlay_png(t, seg, None)?)?;
    write(out, REGIONS_FILE, &to_json_bytes(&RegionsDoc::new(t, seg)))?;
    Ok(())
}

pub fn segment(input: &Path, config: Option<&Path>, out: &Path) -> Result<SegmentationResult, CliError> {
    let cfg = load_pipeline_config(config)?;
    let t = load_input(input)?;
    let seg = run_segment(&t, &cfg)?;
    ensure_dir(out)?;
    write_segmentation(&t, &seg, out)?;
    Ok(seg)
}

/// Segments and analyzes; writes the segmentation files too.
pub fn analyze(
    input: &Path,
    config: Option<&Path>,
    analysis: &AnalysisConfig,
    out: &Path,
) -> Result<DefectReport, CliError> {
    analysis.validate()?;
    let cfg = load_pipeline_config(config)?;
    let t = load_input(input)?;
    let seg = run_segment(&t, &cfg)?;
    let report = run_analysis(&t, &seg, analysis)?;
    ensure_dir(out)?;
    write_segmentation(&t, &seg, out)?;
    write(out, REPORT_FILE, &to_json_bytes(&report))?;
    write(out, OVERLAY_FILE, &render::overlay_png(&t, &seg, Some(&report))?)?;
    write(out, HISTOGRAMS_FILE, &to_json_bytes(&histograms(&report)))?;
    Ok(report)
}
