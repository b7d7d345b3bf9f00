use std::path::PathBuf;

use thermoscan_core::analysis::AnalysisError;
use thermoscan_core::pipeline::PipelineError;
use thermoscan_core::pngio::PngError;
use thermoscan_core::thermogram::ThermogramError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error(transparent)]
    Thermogram(#[from] ThermogramError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("png encoding failed: {0}")]
    Png(#[from] PngError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Short error name for diagnostics, e.g. `BadMagic`.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "Io",
            Self::Config { .. } => "InvalidConfig",
            Self::Thermogram(e) => e.kind(),
            Self::Pipeline(e) => e.kind(),
            Self::Analysis(e) => e.kind(),
            Self::Png(_) => "Png",
        }
    }

    /// 2 when no modules were found, 1 for every other failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Pipeline(PipelineError::NoModulesFound) => 2,
            _ => 1,
        }
    }
}
