//! Thermal inspection of photovoltaic arrays.
//!
//! The crate turns a [`Thermogram`] (visual image plus a per-pixel
//! temperature matrix) into segmented PV modules and a per-module hot-spot
//! report:
//!
//! 1. [`imgproc`]: grayscale, DHE + CLAHE enhancement, Gaussian smoothing,
//!    Otsu binarization, morphological opening, distance transform,
//!    connected components and marker-based watershed.
//! 2. [`pipeline`]: chains those kernels into module segmentation.
//! 3. [`analysis`]: per-module temperature statistics and the
//!    `mean + std` defect threshold.

pub mod analysis;
pub mod imgproc;
pub mod pipeline;
pub mod pngio;
pub mod render;
pub mod thermogram;

pub use analysis::{analyze, AnalysisConfig, DefectReport};
pub use imgproc::{BinaryMask, GrayImage, LabelMap};
pub use pipeline::{segment, PipelineConfig, SegmentationResult};
pub use thermogram::{load_thermogram, save_thermogram, Thermogram};
