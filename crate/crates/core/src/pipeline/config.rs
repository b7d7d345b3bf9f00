use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::imgproc::clahe::{DEFAULT_CLIP_LIMIT, DEFAULT_TILES};
use crate::imgproc::dhe::{DEFAULT_MIN_PARTITION_SPAN, DEFAULT_SMOOTHING_WINDOW};
use crate::imgproc::morphology::ElementShape;
use crate::imgproc::{Connectivity, StructuringElement};

/// Which side of the Otsu threshold holds the modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulePolarity {
    /// Modules darker than their surroundings in the visual image.
    Dark,
    Bright,
}

/// Every stage knob of the segmentation flow. Serializes as a flat JSON
/// object; missing keys take their defaults, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dhe_smoothing_window: usize,
    pub dhe_min_partition_span: usize,
    pub clahe_tiles_x: usize,
    pub clahe_tiles_y: usize,
    pub clahe_clip_limit: f64,
    pub gaussian_sigma: f64,
    pub structuring_element: ElementShape,
    pub structuring_element_size: usize,
    /// Sure-foreground cut as a fraction of each component's peak distance.
    pub marker_alpha: f64,
    pub background_dilation_iterations: usize,
    /// Fill background pockets enclosed by module pixels (bright hot spots)
    /// before opening.
    pub fill_holes: bool,
    pub connectivity: Connectivity,
    pub min_module_area_fraction: f64,
    pub module_polarity: ModulePolarity,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dhe_smoothing_window: DEFAULT_SMOOTHING_WINDOW,
            dhe_min_partition_span: DEFAULT_MIN_PARTITION_SPAN,
            clahe_tiles_x: DEFAULT_TILES,
            clahe_tiles_y: DEFAULT_TILES,
            clahe_clip_limit: DEFAULT_CLIP_LIMIT,
            gaussian_sigma: 1.0,
            structuring_element: ElementShape::Box,
            structuring_element_size: 5,
            marker_alpha: 0.5,
            background_dilation_iterations: 3,
            fill_holes: true,
            connectivity: Connectivity::Eight,
            min_module_area_fraction: 0.005,
            module_polarity: ModulePolarity::Dark,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |field: &str, why: &str| Err(PipelineError::InvalidConfig(format!("{field}: {why}")));
        if self.dhe_smoothing_window == 0 || self.dhe_smoothing_window % 2 == 0 {
            return bad("dhe_smoothing_window", "must be odd and >= 1");
        }
        if !(1..=256).contains(&self.dhe_min_partition_span) {
            return bad("dhe_min_partition_span", "must be in 1..=256");
        }
        if self.clahe_tiles_x == 0 || self.clahe_tiles_y == 0 {
            return bad("clahe_tiles", "must be >= 1");
        }
        if !(self.clahe_clip_limit >= 1.0 && self.clahe_clip_limit.is_finite()) {
            return bad("clahe_clip_limit", "must be finite and >= 1");
        }
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return bad("gaussian_sigma", "must be finite and > 0");
        }
        if self.structuring_element_size == 0 || self.structuring_element_size % 2 == 0 {
            return bad("structuring_element_size", "must be odd and >= 1");
        }
        if !(self.marker_alpha > 0.0 && self.marker_alpha < 1.0) {
            return bad("marker_alpha", "must be in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.min_module_area_fraction) {
            return bad("min_module_area_fraction", "must be in [0, 1)");
        }
        Ok(())
    }

    pub fn element(&self) -> StructuringElement {
        StructuringElement::shaped(self.structuring_element, self.structuring_element_size)
            .expect("validated element size")
    }

    /// Minimum region size in pixels for an image of `pixels` pixels.
    pub fn min_area(&self, pixels: usize) -> usize {
        ((self.min_module_area_fraction * pixels as f64).ceil() as usize).max(1)
    }

    pub fn from_json(s: &str) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_json_has_flat_field_names() {
        let v = serde_json::to_value(PipelineConfig::default()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 14);
        assert_eq!(v["connectivity"], 8);
        assert_eq!(v["structuring_element"], "box");
        assert_eq!(v["module_polarity"], "dark");
        assert_eq!(v["clahe_clip_limit"], 4.0);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = PipelineConfig::from_json(r#"{"gaussian_sigma": 2.0}"#).unwrap();
        assert_eq!(cfg.gaussian_sigma, 2.0);
        assert_eq!(cfg.clahe_tiles_x, 8);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(PipelineConfig::from_json(r#"{"sigma": 2.0}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"marker_alpha": 1.0}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"connectivity": 6}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"structuring_element_size": 4}"#).is_err());
    }

    #[test]
    fn min_area_rounds_up() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.min_area(1000), 5);
        assert_eq!(cfg.min_area(1001), 6);
        assert_eq!(cfg.min_area(10), 1);
    }
}
