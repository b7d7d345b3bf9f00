//! On-disk session store.
//!
//! ```text
//! <root>/<id>/thermogram.tgrm   uploaded bytes, verbatim
//!             pipeline.json     config of the last segmentation
//!             analysis.json     config of the last analysis
//!             report.json       DefectReport of the last analysis
//! ```
//!
//! Segmentation results are not persisted; after a restart they are
//! recomputed from `pipeline.json` on first use.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use sha2::{Digest, Sha256};
use thermoscan_core::analysis::{AnalysisConfig, DefectReport};
use thermoscan_core::pipeline::{PipelineConfig, SegmentationResult};
use thermoscan_core::{load_thermogram, Thermogram};
use tokio::sync::Mutex;

use crate::error::CliError;
use crate::output::to_json_bytes;

pub const THERMOGRAM_FILE: &str = "thermogram.tgrm";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug)]
pub struct Entry {
    pub thermogram: Arc<Thermogram>,
    /// Config of the current segmentation, if one was requested.
    pub config: Option<PipelineConfig>,
    /// Cached result for `config`; `None` until computed.
    pub segmentation: Option<Arc<SegmentationResult>>,
    pub analysis: Option<(AnalysisConfig, Arc<DefectReport>)>,
}

impl Entry {
    fn new(t: Thermogram) -> Self {
        Self {
            thermogram: Arc::new(t),
            config: None,
            segmentation: None,
            analysis: None,
        }
    }
}

pub type Shared = Arc<Mutex<Entry>>;

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    entries: RwLock<BTreeMap<String, Shared>>,
}

/// Store id of an uploaded file: `tg-` + first 16 hex digits of SHA-256.
pub fn content_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("tg-{hex}")
}

/// Writes via a temporary sibling and rename so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, CliError> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn remove_if_present(path: &Path) -> Result<(), CliError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(CliError::io(path, e)),
        _ => Ok(()),
    }
}

impl Store {
    /// Opens (creating if needed) a store and reloads every entry in it.
    /// Directories without a readable thermogram are skipped with a warning.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        let mut entries = BTreeMap::new();
        let dir = fs::read_dir(&root).map_err(|e| CliError::io(&root, e))?;
        for item in dir {
            let item = item.map_err(|e| CliError::io(&root, e))?;
            if !item.path().is_dir() {
                continue;
            }
            let id = item.file_name().to_string_lossy().into_owned();
            match Self::recover(&item.path()) {
                Ok(entry) => {
                    entries.insert(id, Arc::new(Mutex::new(entry)));
                }
                Err(e) => tracing::warn!(%id, error = %e, "skipping store entry"),
            }
        }
        tracing::info!(root = %root.display(), entries = entries.len(), "store opened");
        Ok(Self {
            root,
            entries: RwLock::new(entries),
        })
    }

    fn recover(dir: &Path) -> Result<Entry, CliError> {
        let path = dir.join(THERMOGRAM_FILE);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let mut entry = Entry::new(load_thermogram(&bytes)?);
        entry.config = read_json(&dir.join(PIPELINE_FILE))?;
        if entry.config.is_some() {
            let analysis: Option<AnalysisConfig> = read_json(&dir.join(ANALYSIS_FILE))?;
            let report: Option<DefectReport> = read_json(&dir.join(REPORT_FILE))?;
            if let (Some(a), Some(r)) = (analysis, report) {
                entry.analysis = Some((a, Arc::new(r)));
            }
        }
        Ok(entry)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn get(&self, id: &str) -> Option<Shared> {
        self.entries.read().expect("store lock").get(id).cloned()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.read().expect("store lock").keys().cloned().collect()
    }

    /// Stores an upload. Returns its id and whether it was new; identical
    /// bytes map to the existing entry.
    pub fn insert(&self, bytes: &[u8]) -> Result<(String, bool), CliError> {
        let id = content_id(bytes);
        if self.get(&id).is_some() {
            return Ok((id, false));
        }
        let t = load_thermogram(bytes)?;
        let dir = self.dir(&id);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        write_atomic(&dir.join(THERMOGRAM_FILE), bytes)?;
        let mut map = self.entries.write().expect("store lock");
        let created = !map.contains_key(&id);
        map.entry(id.clone()).or_insert_with(|| Arc::new(Mutex::new(Entry::new(t))));
        Ok((id, created))
    }

    /// Records a new segmentation config and drops any analysis derived
    /// from the previous one.
    pub fn persist_segmentation(&self, id: &str, cfg: &PipelineConfig) -> Result<(), CliError> {
        let dir = self.dir(id);
        remove_if_present(&dir.join(REPORT_FILE))?;
        remove_if_present(&dir.join(ANALYSIS_FILE))?;
        write_atomic(&dir.join(PIPELINE_FILE), &to_json_bytes(cfg))
    }

    pub fn persist_analysis(&self, id: &str, cfg: &AnalysisConfig, report: &DefectReport) -> Result<(), CliError> {
        let dir = self.dir(id);
        write_atomic(&dir.join(REPORT_FILE), &to_json_bytes(report))?;
        write_atomic(&dir.join(ANALYSIS_FILE), &to_json_bytes(cfg))
    }
}
