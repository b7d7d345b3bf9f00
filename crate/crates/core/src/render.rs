//! Overlays drawn on the visual image: defect pixels in red at 60% opacity,
//! module contours in green, 1 px.

use crate::analysis::DefectReport;
use crate::pipeline::SegmentationResult;
use crate::pngio::{self, PngError};
use crate::thermogram::Thermogram;

pub const DEFECT_RGB: [u8; 3] = [255, 0, 0];
pub const DEFECT_ALPHA: f32 = 0.6;
pub const BOUNDARY_RGB: [u8; 3] = [0, 255, 0];

fn blend(base: u8, over: u8, alpha: f32) -> u8 {
    ((1.0 - alpha) * base as f32 + alpha * over as f32).round() as u8
}

/// Visual image as 8-bit RGB with the overlays applied.
pub fn overlay_rgb(t: &Thermogram, seg: &SegmentationResult, report: Option<&DefectReport>) -> Vec<u8> {
    let w = t.width();
    let mut rgb = t.visual().to_rgb8();
    if let Some(report) = report {
        for m in &report.modules {
            for &[r, c] in &m.defect_pixels {
                let px = &mut rgb[3 * (r * w + c)..3 * (r * w + c) + 3];
                for (ch, &over) in px.iter_mut().zip(&DEFECT_RGB) {
                    *ch = blend(*ch, over, DEFECT_ALPHA);
                }
            }
        }
    }
    for region in &seg.regions {
        for &(r, c) in &region.boundary {
            rgb[3 * (r * w + c)..3 * (r * w + c) + 3].copy_from_slice(&BOUNDARY_RGB);
        }
    }
    rgb
}

pub fn overlay_png(t: &Thermogram, seg: &SegmentationResult, report: Option<&DefectReport>) -> Result<Vec<u8>, PngError> {
    pngio::encode_rgb8(t.width(), t.height(), &overlay_rgb(t, seg, report))
}

pub fn visual_png(t: &Thermogram) -> Result<Vec<u8>, PngError> {
    pngio::encode_rgb8(t.width(), t.height(), &t.visual().to_rgb8())
}
