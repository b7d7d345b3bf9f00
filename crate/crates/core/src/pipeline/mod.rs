//! Module segmentation: enhance, binarize, clean, seed and flood.

mod boundary;
mod config;

pub use boundary::trace_boundary;
pub use config::{ModulePolarity, PipelineConfig};

use serde::Serialize;
use thiserror::Error;

use crate::imgproc::dump;
use crate::imgproc::{
    self, binarize_above_bin, connected_components, dilate, distance_transform, fill_holes, histogram, open, otsu_threshold,
    to_grayscale, watershed_in_domain, BinaryMask, DistanceField, GrayImage, ImgprocError, LabelMap,
    StructuringElement,
};
use crate::pngio::PngError;
use crate::thermogram::Thermogram;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("no PV modules found")]
    NoModulesFound,
    #[error("label {0} not present in label map")]
    LabelNotFound(u32),
    #[error(transparent)]
    Imgproc(#[from] ImgprocError),
}

impl PipelineError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidConfig(_) => "InvalidConfig",
            Self::NoModulesFound => "NoModulesFound",
            Self::LabelNotFound(_) => "LabelNotFound",
            Self::Imgproc(_) => "Imgproc",
        }
    }
}

/// Inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundingBox {
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleRegion {
    pub label: u32,
    pub pixel_count: usize,
    pub bbox: BoundingBox,
    /// Closed outer contour as `[row, col]` points.
    pub boundary: Vec<(usize, usize)>,
    pub touches_border: bool,
}

/// Named intermediate stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Grayscale,
    Dhe,
    Clahe,
    Blurred,
    Binary,
    Opened,
    Distance,
    Markers,
    Watershed,
    Labels,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Grayscale,
        Stage::Dhe,
        Stage::Clahe,
        Stage::Blurred,
        Stage::Binary,
        Stage::Opened,
        Stage::Distance,
        Stage::Markers,
        Stage::Watershed,
        Stage::Labels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Grayscale => "grayscale",
            Stage::Dhe => "dhe",
            Stage::Clahe => "clahe",
            Stage::Blurred => "blurred",
            Stage::Binary => "binary",
            Stage::Opened => "opened",
            Stage::Distance => "distance",
            Stage::Markers => "markers",
            Stage::Watershed => "watershed",
            Stage::Labels => "labels",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Gray(GrayImage),
    Mask(BinaryMask),
    Distance(DistanceField),
    Labels(LabelMap),
}

impl Snapshot {
    /// 8-bit rendering; label maps get a fixed palette.
    pub fn to_png(&self) -> Result<Vec<u8>, PngError> {
        match self {
            Snapshot::Gray(g) => dump::gray_to_png(g),
            Snapshot::Mask(m) => dump::mask_to_png(m),
            Snapshot::Distance(d) => dump::distance_to_png(d),
            Snapshot::Labels(l) => dump::labels_to_color_png(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    /// I_PV: union of all emitted module regions.
    pub mask: BinaryMask,
    /// Binarized image after opening, before watershed.
    pub opened: BinaryMask,
    pub labels: LabelMap,
    pub regions: Vec<ModuleRegion>,
    pub config: PipelineConfig,
    pub otsu_bin: u8,
    pub snapshots: Vec<(Stage, Snapshot)>,
}

impl SegmentationResult {
    /// Wraps an existing label map (labels `1..=label_count`, each present).
    /// Both masks are the label map's foreground.
    pub fn from_labels(labels: LabelMap, config: PipelineConfig) -> Result<Self, PipelineError> {
        let regions = extract_regions(&labels)?;
        let mask = labels.foreground();
        Ok(Self {
            opened: mask.clone(),
            mask,
            labels,
            regions,
            config,
            otsu_bin: 0,
            snapshots: Vec::new(),
        })
    }

    pub fn snapshot(&self, stage: Stage) -> Option<&Snapshot> {
        self.snapshots.iter().find(|(s, _)| *s == stage).map(|(_, snap)| snap)
    }

    pub fn region(&self, label: u32) -> Option<&ModuleRegion> {
        self.regions.iter().find(|r| r.label == label)
    }
}

/// Seeds one marker per opened component from the pixels whose distance to
/// the background exceeds `marker_alpha` times that component's peak.
pub fn build_markers(opened: &BinaryMask, cfg: &PipelineConfig) -> LabelMap {
    let components = connected_components(opened, cfg.connectivity);
    let dt = distance_transform(opened);
    let mut peak = vec![0f64; components.label_count() as usize + 1];
    for (&l, &d) in components.data().iter().zip(dt.data()) {
        peak[l as usize] = peak[l as usize].max(d);
    }
    let sure = BinaryMask::from_fn(opened.width(), opened.height(), |r, c| {
        let l = components.get(r, c);
        l > 0 && dt.get(r, c) > cfg.marker_alpha * peak[l as usize]
    });
    connected_components(&sure, cfg.connectivity)
}

/// Smallest CLAHE tile side the pipeline will use. Below roughly 256 pixels
/// per tile the clipped excess is too small to spread over the bins and the
/// tile mapping collapses.
pub const MIN_TILE_SIDE: usize = 32;

/// Tile count along an axis of `len` pixels, reduced so tiles keep at least
/// [`MIN_TILE_SIDE`] pixels.
pub fn effective_tiles(requested: usize, len: usize) -> usize {
    requested.min((len / MIN_TILE_SIDE).max(1))
}

pub fn segment(t: &Thermogram, cfg: &PipelineConfig) -> Result<SegmentationResult, PipelineError> {
    run(t, cfg, false)
}

/// Like [`segment`], also keeping a copy of every intermediate raster.
pub fn segment_with_snapshots(t: &Thermogram, cfg: &PipelineConfig) -> Result<SegmentationResult, PipelineError> {
    run(t, cfg, true)
}

fn run(t: &Thermogram, cfg: &PipelineConfig, keep: bool) -> Result<SegmentationResult, PipelineError> {
    cfg.validate()?;
    let (w, h) = (t.width(), t.height());
    let mut snapshots = Vec::new();
    let mut snap = |stage: Stage, s: &dyn Fn() -> Snapshot| {
        if keep {
            snapshots.push((stage, s()));
        }
    };

    let gray = to_grayscale(t.visual());
    snap(Stage::Grayscale, &|| Snapshot::Gray(gray.clone()));
    let eq = imgproc::dhe(&gray, cfg.dhe_smoothing_window, cfg.dhe_min_partition_span)?;
    snap(Stage::Dhe, &|| Snapshot::Gray(eq.clone()));
    let local = imgproc::clahe(
        &eq,
        effective_tiles(cfg.clahe_tiles_x, w),
        effective_tiles(cfg.clahe_tiles_y, h),
        cfg.clahe_clip_limit,
    )?;
    snap(Stage::Clahe, &|| Snapshot::Gray(local.clone()));
    let blurred = imgproc::gaussian_blur(&local, cfg.gaussian_sigma)?;
    snap(Stage::Blurred, &|| Snapshot::Gray(blurred.clone()));

    let hist = histogram(&blurred);
    let otsu_bin = otsu_threshold(&hist)?;
    let binary = if hist.occupied_bins() <= 1 {
        // nothing to separate
        BinaryMask::zeros(w, h)
    } else {
        let above = binarize_above_bin(&blurred, otsu_bin);
        match cfg.module_polarity {
            ModulePolarity::Dark => above.not(),
            ModulePolarity::Bright => above,
        }
    };
    let binary = if cfg.fill_holes { fill_holes(&binary) } else { binary };
    snap(Stage::Binary, &|| Snapshot::Mask(binary.clone()));
    let opened = open(&binary, &cfg.element());
    snap(Stage::Opened, &|| Snapshot::Mask(opened.clone()));

    let dt = distance_transform(&opened);
    snap(Stage::Distance, &|| Snapshot::Distance(dt.clone()));
    let markers = build_markers(&opened, cfg);
    snap(Stage::Markers, &|| Snapshot::Labels(markers.clone()));
    if markers.label_count() == 0 {
        return Err(PipelineError::NoModulesFound);
    }

    let peak = dt.max();
    let relief = GrayImage::from_raw(w, h, dt.data().iter().map(|&d| (1.0 - d / peak) as f32).collect());
    let unit = StructuringElement::square(3).expect("3x3 element");
    let mut domain = opened.clone();
    for _ in 0..cfg.background_dilation_iterations {
        domain = dilate(&domain, &unit);
    }
    let flooded = watershed_in_domain(&relief, &markers, Some(&domain))?;
    snap(Stage::Watershed, &|| Snapshot::Labels(flooded.clone()));

    let seeds = markers.label_count();
    let clipped: Vec<u32> = flooded
        .data()
        .iter()
        .zip(opened.data())
        .map(|(&l, &m)| if l <= seeds && m == 1 { l } else { 0 })
        .collect();
    let mut areas = vec![0usize; seeds as usize + 1];
    for &l in &clipped {
        areas[l as usize] += 1;
    }
    let min_area = cfg.min_area(w * h);
    let mut remap = vec![0u32; seeds as usize + 1];
    let mut next = 0;
    for l in 1..=seeds as usize {
        if areas[l] >= min_area {
            next += 1;
            remap[l] = next;
        }
    }
    if next == 0 {
        return Err(PipelineError::NoModulesFound);
    }
    let labels = LabelMap::new(w, h, clipped.iter().map(|&l| remap[l as usize]).collect(), next)?;
    snap(Stage::Labels, &|| Snapshot::Labels(labels.clone()));

    let regions = extract_regions(&labels)?;
    Ok(SegmentationResult {
        mask: labels.foreground(),
        opened,
        labels,
        regions,
        config: cfg.clone(),
        otsu_bin,
        snapshots,
    })
}

fn extract_regions(labels: &LabelMap) -> Result<Vec<ModuleRegion>, PipelineError> {
    let (w, h) = (labels.width(), labels.height());
    let n = labels.label_count() as usize;
    let mut boxes: Vec<Option<BoundingBox>> = vec![None; n + 1];
    let mut counts = vec![0usize; n + 1];
    for r in 0..h {
        for c in 0..w {
            let l = labels.get(r, c) as usize;
            if l == 0 {
                continue;
            }
            counts[l] += 1;
            let b = boxes[l].get_or_insert(BoundingBox {
                row0: r,
                col0: c,
                row1: r,
                col1: c,
            });
            b.col0 = b.col0.min(c);
            b.col1 = b.col1.max(c);
            b.row1 = r;
        }
    }
    (1..=n)
        .map(|l| {
            let bbox = boxes[l].ok_or(PipelineError::LabelNotFound(l as u32))?;
            Ok(ModuleRegion {
                label: l as u32,
                pixel_count: counts[l],
                bbox,
                boundary: trace_boundary(labels, l as u32)?,
                touches_border: bbox.row0 == 0 || bbox.col0 == 0 || bbox.row1 == h - 1 || bbox.col1 == w - 1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermogram::{generate_synthetic, Crop, SyntheticSpec};

    fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
        let inter = a.and(b).count_ones();
        let union = a.or(b).count_ones();
        inter as f64 / union as f64
    }

    /// Best IoU of each ground-truth module against any predicted region.
    fn module_ious(truth: &LabelMap, pred: &LabelMap) -> Vec<f64> {
        (1..=truth.label_count())
            .map(|g| {
                let gm = truth.mask_of(g);
                (1..=pred.label_count())
                    .map(|p| iou(&gm, &pred.mask_of(p)))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    #[test]
    fn noiseless_grid_gives_six_modules() {
        let (t, truth) = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let seg = segment(&t, &PipelineConfig::default()).unwrap();
        assert_eq!(seg.regions.len(), 6);
        for v in module_ious(&truth.modules, &seg.labels) {
            assert!(v >= 0.9, "iou {v}");
        }
        assert!(seg.regions.iter().all(|r| !r.touches_border));
    }

    #[test]
    fn background_only_scene_has_no_modules() {
        let spec = SyntheticSpec {
            rows: 0,
            cols: 0,
            ..SyntheticSpec::default()
        };
        let (t, _) = generate_synthetic(&spec).unwrap();
        assert_eq!(segment(&t, &PipelineConfig::default()), Err(PipelineError::NoModulesFound));
    }

    #[test]
    fn cropped_module_touches_border() {
        let full = SyntheticSpec::default();
        let (w, h) = full.image_size();
        // cut through the middle of the right-hand column of modules
        let right = full.module_rect(2);
        let spec = SyntheticSpec {
            crop: Some(Crop {
                row: 0,
                col: 0,
                width: (right.col0 + right.col1) / 2,
                height: h,
            }),
            ..full
        };
        assert!(spec.crop.unwrap().width < w);
        let (t, truth) = generate_synthetic(&spec).unwrap();
        let seg = segment(&t, &PipelineConfig::default()).unwrap();
        assert_eq!(seg.regions.len(), 6);
        let edge: Vec<_> = seg.regions.iter().filter(|r| r.touches_border).collect();
        assert_eq!(edge.len(), 2);
        assert!(edge.iter().all(|r| r.bbox.col1 == t.width() - 1));
        for v in module_ious(&truth.modules, &seg.labels) {
            assert!(v >= 0.9, "iou {v}");
        }
    }

    #[test]
    fn regions_respect_invariants() {
        let spec = SyntheticSpec {
            rows: 3,
            cols: 4,
            noise_std_c: 0.5,
            seed: 11,
            ..SyntheticSpec::default()
        };
        let (t, _) = generate_synthetic(&spec).unwrap();
        let cfg = PipelineConfig::default();
        let seg = segment(&t, &cfg).unwrap();
        let min_area = cfg.min_area(t.width() * t.height());
        let areas = seg.labels.areas();
        for (i, r) in seg.regions.iter().enumerate() {
            assert_eq!(r.label, i as u32 + 1);
            assert!(r.pixel_count >= min_area);
            assert_eq!(areas[r.label as usize], r.pixel_count);
            assert_eq!(r.boundary.first(), r.boundary.last());
            let m = seg.labels.mask_of(r.label);
            // tight box: every edge row/column holds a region pixel
            let b = r.bbox;
            assert!((b.col0..=b.col1).any(|c| m.get(b.row0, c)));
            assert!((b.col0..=b.col1).any(|c| m.get(b.row1, c)));
            assert!((b.row0..=b.row1).any(|rr| m.get(rr, b.col0)));
            assert!((b.row0..=b.row1).any(|rr| m.get(rr, b.col1)));
        }
        assert!(seg.mask.is_subset_of(&seg.opened));
        assert_eq!(seg.mask, seg.labels.foreground());
    }

    #[test]
    fn markers_survive_into_their_regions() {
        let (t, _) = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let cfg = PipelineConfig::default();
        let seg = segment_with_snapshots(&t, &cfg).unwrap();
        let Some(Snapshot::Labels(markers)) = seg.snapshot(Stage::Markers) else {
            panic!("markers snapshot missing");
        };
        let Some(Snapshot::Labels(flooded)) = seg.snapshot(Stage::Watershed) else {
            panic!("watershed snapshot missing");
        };
        for (&m, &f) in markers.data().iter().zip(flooded.data()) {
            if m > 0 {
                assert_eq!(m, f);
            }
        }
        assert_eq!(seg.snapshots.len(), Stage::ALL.len());
        for (stage, s) in &seg.snapshots {
            assert!(!s.to_png().unwrap().is_empty(), "{}", stage.name());
        }
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec {
            noise_std_c: 0.5,
            seed: 5,
            ..SyntheticSpec::default()
        };
        let (t, _) = generate_synthetic(&spec).unwrap();
        let cfg = PipelineConfig::default();
        assert_eq!(segment(&t, &cfg).unwrap(), segment(&t, &cfg).unwrap());
    }

    #[test]
    fn bridged_squares_get_two_markers() {
        // two 14x14 squares joined by a one-pixel line, 20x40 canvas
        let mask = BinaryMask::from_fn(40, 20, |r, c| {
            let in_a = (3..17).contains(&r) && (3..17).contains(&c);
            let in_b = (3..17).contains(&r) && (23..37).contains(&c);
            in_a || in_b || (r == 10 && (17..23).contains(&c))
        });
        let cfg = PipelineConfig::default();
        // the bridge makes them one component before opening
        assert_eq!(connected_components(&mask, cfg.connectivity).label_count(), 1);
        let opened = open(&mask, &cfg.element());
        let markers = build_markers(&opened, &cfg);
        assert_eq!(markers.label_count(), 2);
        // each marker is the set strictly above half the 7-pixel peak: a
        // centred block whose brute-force distance exceeds 3.5
        for r in 0..20 {
            for c in 0..40 {
                let l = markers.get(r, c);
                if l > 0 {
                    let (c0, c1) = if l == 1 { (3, 17) } else { (23, 37) };
                    assert!((c0..c1).contains(&c));
                    let inner = [r as isize - 2, 17 - r as isize, c as isize - c0 as isize + 1, c1 as isize - c as isize];
                    assert!(inner.iter().all(|&d| d as f64 > 3.5), "({r},{c})");
                }
            }
        }
    }

    #[test]
    fn single_square_marker_sits_on_peak() {
        let mask = BinaryMask::from_fn(15, 15, |r, c| (2..13).contains(&r) && (2..13).contains(&c));
        let markers = build_markers(&mask, &PipelineConfig::default());
        assert_eq!(markers.label_count(), 1);
        assert_eq!(markers.get(7, 7), 1);
        assert_eq!(markers.get(2, 2), 0);
    }

    #[test]
    fn crop_keeps_module_pixels() {
        let spec = SyntheticSpec::default();
        let (t, _) = generate_synthetic(&spec).unwrap();
        let cfg = PipelineConfig::default();
        let full = segment(&t, &cfg).unwrap();
        // window containing module 0 with some context
        let rect = spec.module_rect(0);
        let (r0, c0) = (0, 0);
        let (cw, ch) = (rect.col1 + 20, rect.row1 + 20);
        let sub = t.crop(r0, c0, cw, ch).unwrap();
        let part = segment(&sub, &cfg).unwrap();
        let label = full.labels.get(rect.row0 + 5, rect.col0 + 5);
        let expected = BinaryMask::from_fn(cw, ch, |r, c| full.labels.get(r, c) == label);
        let got_label = part.labels.get(rect.row0 + 5, rect.col0 + 5);
        assert!(got_label > 0);
        assert!(iou(&expected, &part.labels.mask_of(got_label)) >= 0.9);
    }

    #[test]
    fn invalid_config_rejected() {
        let (t, _) = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let cfg = PipelineConfig {
            gaussian_sigma: 0.0,
            ..PipelineConfig::default()
        };
        assert!(matches!(segment(&t, &cfg), Err(PipelineError::InvalidConfig(_))));
    }
}
