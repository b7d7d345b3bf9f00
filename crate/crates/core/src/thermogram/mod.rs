//! Thermogram data model: a visual RGB raster paired with a same-shape
//! temperature matrix in degrees Celsius.

mod format;
mod synthetic;

use std::collections::BTreeMap;

use thiserror::Error;

pub use format::{load_thermogram, load_thermogram_with, save_thermogram, LoadOptions, MAGIC, VERSION};
pub use synthetic::{generate_synthetic, Crop, HotSpot, ModuleRect, SyntheticSpec, SyntheticTruth};

/// Metadata key reserved for the thermogram id inside the container header.
pub const ID_META_KEY: &str = "id";

#[derive(Debug, Error)]
pub enum ThermogramError {
    #[error("bad magic {found:?} at offset 0, expected \"TGRM\"")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported container version {version} at offset 4")]
    UnsupportedVersion { version: u16 },
    #[error("shape mismatch in {field}: expected {expected}, found {found}")]
    ShapeMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("non-finite temperature {value} at cell {index} (byte offset {offset})")]
    NonFiniteTemperature { index: usize, offset: usize, value: f32 },
    #[error("temperature {value} °C at cell {index} (byte offset {offset}) outside [{min}, {max}] °C")]
    OutOfPhysicalRange {
        index: usize,
        offset: usize,
        value: f32,
        min: f32,
        max: f32,
    },
    #[error("truncated {field} at byte offset {offset}")]
    Truncated { field: &'static str, offset: usize },
    #[error("{count} trailing bytes at offset {offset}")]
    TrailingBytes { offset: usize, count: usize },
    #[error("bad header at offset {offset}: {reason}")]
    BadHeader { offset: usize, reason: String },
    #[error("bad visual image at offset {offset}: {reason}")]
    BadVisual { offset: usize, reason: String },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    Png(#[from] crate::pngio::PngError),
}

impl ThermogramError {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::BadMagic { .. } => "BadMagic",
            Self::UnsupportedVersion { .. } => "UnsupportedVersion",
            Self::ShapeMismatch { .. } => "ShapeMismatch",
            Self::NonFiniteTemperature { .. } => "NonFiniteTemperature",
            Self::OutOfPhysicalRange { .. } => "OutOfPhysicalRange",
            Self::Truncated { .. } => "Truncated",
            Self::TrailingBytes { .. } => "TrailingBytes",
            Self::BadHeader { .. } => "BadHeader",
            Self::BadVisual { .. } => "BadVisual",
            Self::Invalid { .. } => "Invalid",
            Self::SpecInvalid(_) => "SpecInvalid",
            Self::Png(_) => "Png",
        }
    }
}

/// RGB raster with channel intensities in `[0, 1]`, interleaved row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl VisualImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, ThermogramError> {
        if width.checked_mul(height).and_then(|n| n.checked_mul(3)) != Some(data.len()) {
            return Err(ThermogramError::ShapeMismatch {
                field: "visual",
                expected: format!("{} samples", width * height * 3),
                found: format!("{} samples", data.len()),
            });
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(ThermogramError::Invalid {
                field: "visual",
                reason: format!("sample {i} = {} outside [0, 1]", data[i]),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self, ThermogramError> {
        Self::new(width, height, rgb.iter().map(|&v| v as f32 / 255.0).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f32; 3] {
        let i = 3 * (row * self.width + col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// 8-bit quantization, `round(255 v)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| (v * 255.0).round() as u8).collect()
    }
}

/// Row-major temperatures in °C, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureMatrix {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl TemperatureMatrix {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, ThermogramError> {
        if width.checked_mul(height) != Some(data.len()) {
            return Err(ThermogramError::ShapeMismatch {
                field: "temperature",
                expected: format!("{} cells", width * height),
                found: format!("{} cells", data.len()),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(ThermogramError::NonFiniteTemperature {
                index,
                offset: 4 * index,
                value: data[index],
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    pub fn min_max(&self) -> Option<(f32, f32)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// A visual image and its temperature matrix, identical in shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Thermogram {
    id: String,
    visual: VisualImage,
    temperature: TemperatureMatrix,
    meta: BTreeMap<String, String>,
}

impl Thermogram {
    pub fn new(
        id: impl Into<String>,
        visual: VisualImage,
        temperature: TemperatureMatrix,
        meta: BTreeMap<String, String>,
    ) -> Result<Self, ThermogramError> {
        if (visual.width, visual.height) != (temperature.width, temperature.height) {
            return Err(ThermogramError::ShapeMismatch {
                field: "thermogram",
                expected: format!("visual {}x{}", visual.width, visual.height),
                found: format!("temperature {}x{}", temperature.width, temperature.height),
            });
        }
        if meta.contains_key(ID_META_KEY) {
            return Err(ThermogramError::Invalid {
                field: "meta",
                reason: format!("key `{ID_META_KEY}` is reserved for the thermogram id"),
            });
        }
        Ok(Self {
            id: id.into(),
            visual,
            temperature,
            meta,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn visual(&self) -> &VisualImage {
        &self.visual
    }

    pub fn temperature(&self) -> &TemperatureMatrix {
        &self.temperature
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn width(&self) -> usize {
        self.visual.width
    }

    pub fn height(&self) -> usize {
        self.visual.height
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Sub-window copy; the id and metadata are kept.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Self, ThermogramError> {
        if row + height > self.height() || col + width > self.width() {
            return Err(ThermogramError::Invalid {
                field: "crop",
                reason: format!(
                    "window {width}x{height} at ({row}, {col}) exceeds {}x{}",
                    self.width(),
                    self.height()
                ),
            });
        }
        let mut vis = Vec::with_capacity(width * height * 3);
        let mut temp = Vec::with_capacity(width * height);
        for r in row..row + height {
            let base = r * self.width();
            vis.extend_from_slice(&self.visual.data[3 * (base + col)..3 * (base + col + width)]);
            temp.extend_from_slice(&self.temperature.data[base + col..base + col + width]);
        }
        Ok(Self {
            id: self.id.clone(),
            visual: VisualImage { width, height, data: vis },
            temperature: TemperatureMatrix { width, height, data: temp },
            meta: self.meta.clone(),
        })
    }
}
