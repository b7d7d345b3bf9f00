//! HTTP API over a [`Store`].
//!
//! Requests on one thermogram are serialized by its entry mutex; pixel work
//! runs on the blocking pool so the reactor stays responsive.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use thermoscan_core::analysis::{self, AnalysisConfig, AnalysisError};
use thermoscan_core::pipeline::{self, BoundingBox, PipelineConfig, PipelineError, SegmentationResult, Stage};
use thermoscan_core::render;

use crate::error::CliError;
use crate::output::{to_json_bytes, HistogramDoc, RegionsDoc};
use crate::store::{Entry, Shared, Store};

/// Uploads larger than this are refused.
pub const MAX_UPLOAD_BYTES: usize = 512 << 20;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    fn bad_request(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, kind, message)
    }

    fn not_found(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, kind, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        let status = match &e {
            CliError::Thermogram(_) => StatusCode::BAD_REQUEST,
            CliError::Pipeline(PipelineError::InvalidConfig(_) | PipelineError::NoModulesFound) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            CliError::Analysis(AnalysisError::InvalidConfig(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            CliError::Analysis(AnalysisError::OutOfBounds { .. }) => StatusCode::BAD_REQUEST,
            CliError::Analysis(AnalysisError::LabelNotFound(_)) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.kind(), e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        CliError::from(e).into()
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        CliError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(kind = self.kind, "{}", self.message);
        }
        (self.status, Json(json!({ "error": self.message, "kind": self.kind }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_bytes<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], to_json_bytes(value)).into_response()
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn lookup(store: &Store, id: &str) -> ApiResult<Shared> {
    store
        .get(id)
        .ok_or_else(|| ApiError::not_found("UnknownThermogram", format!("no thermogram with id {id}")))
}

/// Optional JSON body: empty means defaults, broken syntax is 400 and a
/// well-formed document with bad fields is 422.
fn parse_body<T: DeserializeOwned + Default>(body: &[u8]) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidConfig", e.to_string())
        }
        _ => ApiError::bad_request("MalformedJson", e.to_string()),
    })
}

fn query_usize(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<usize>> {
    q.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| ApiError::bad_request("BadQuery", format!("`{key}` must be a non-negative integer, got {v:?}")))
        })
        .transpose()
}

fn not_segmented(id: &str) -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "NotSegmented", format!("thermogram {id} has not been segmented"))
}

/// The entry's segmentation, recomputing it from the stored config after a
/// restart. 409 when no segmentation was ever requested.
async fn segmentation(id: &str, entry: &mut Entry) -> ApiResult<Arc<SegmentationResult>> {
    if let Some(seg) = &entry.segmentation {
        return Ok(seg.clone());
    }
    let cfg = entry.config.clone().ok_or_else(|| not_segmented(id))?;
    let t = entry.thermogram.clone();
    let seg = blocking(move || Ok(pipeline::segment_with_snapshots(&t, &cfg)?)).await?;
    let seg = Arc::new(seg);
    entry.segmentation = Some(seg.clone());
    Ok(seg)
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/thermograms", get(list).post(upload))
        .route("/thermograms/{id}", get(status))
        .route("/thermograms/{id}/visual.png", get(visual))
        .route("/thermograms/{id}/temperature", get(temperature))
        .route("/thermograms/{id}/segment", post(segment))
        .route("/thermograms/{id}/modules", get(modules))
        .route("/thermograms/{id}/overlay.png", get(overlay))
        .route("/thermograms/{id}/analyze", post(analyze))
        .route("/thermograms/{id}/modules/{label}/histogram", get(histogram))
        .route("/thermograms/{id}/stages/{file}", get(stage))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(store)
}

async fn list(State(store): State<Arc<Store>>) -> Response {
    json_bytes(StatusCode::OK, &json!({ "ids": store.ids() }))
}

async fn upload(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<Response> {
    let s = store.clone();
    let (id, created) = blocking(move || Ok(s.insert(&body)?)).await?;
    let code = if created { StatusCode::CREATED } else { StatusCode::OK };
    if created {
        tracing::info!(%id, "thermogram stored");
    }
    Ok(json_bytes(code, &json!({ "id": id })))
}

async fn status(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let e = entry.lock().await;
    let t = &e.thermogram;
    Ok(json_bytes(
        StatusCode::OK,
        &json!({
            "id": id,
            "thermogram_id": t.id(),
            "width": t.width(),
            "height": t.height(),
            "segmented": e.config.is_some(),
            "analyzed": e.analysis.is_some(),
        }),
    ))
}

async fn visual(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let t = lookup(&store, &id)?.lock().await.thermogram.clone();
    let bytes = blocking(move || render::visual_png(&t).map_err(|e| ApiError::internal(e.to_string()))).await?;
    Ok(png(bytes))
}

async fn temperature(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let (row, col) = match (query_usize(&q, "row")?, query_usize(&q, "col")?) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(ApiError::bad_request("BadQuery", "`row` and `col` are required")),
    };
    let t = entry.lock().await.thermogram.clone();
    let celsius = analysis::query_temperature(&t, row, col)?;
    Ok(json_bytes(StatusCode::OK, &json!({ "row": row, "col": col, "celsius": celsius })))
}

#[derive(Serialize)]
struct RegionSummary {
    label: u32,
    pixel_count: usize,
    bbox: BoundingBox,
    touches_border: bool,
}

#[derive(Serialize)]
struct StageLink {
    stage: &'static str,
    url: String,
}

#[derive(Serialize)]
struct SegmentSummary<'a> {
    id: &'a str,
    thermogram_id: &'a str,
    module_count: usize,
    otsu_bin: u8,
    config: &'a PipelineConfig,
    regions: Vec<RegionSummary>,
    stages: Vec<StageLink>,
}

async fn segment(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let cfg: PipelineConfig = parse_body(&body)?;
    cfg.validate()?;
    let mut e = entry.lock().await;
    let seg = if e.config.as_ref() == Some(&cfg) {
        segmentation(&id, &mut e).await?
    } else {
        let t = e.thermogram.clone();
        let (s, i, c) = (store.clone(), id.clone(), cfg.clone());
        let seg = blocking(move || {
            let seg = pipeline::segment_with_snapshots(&t, &c)?;
            s.persist_segmentation(&i, &c)?;
            Ok(seg)
        })
        .await?;
        let seg = Arc::new(seg);
        e.config = Some(cfg);
        e.segmentation = Some(seg.clone());
        e.analysis = None;
        tracing::info!(%id, modules = seg.regions.len(), "segmented");
        seg
    };
    let summary = SegmentSummary {
        id: &id,
        thermogram_id: e.thermogram.id(),
        module_count: seg.regions.len(),
        otsu_bin: seg.otsu_bin,
        config: &seg.config,
        regions: seg
            .regions
            .iter()
            .map(|r| RegionSummary {
                label: r.label,
                pixel_count: r.pixel_count,
                bbox: r.bbox,
                touches_border: r.touches_border,
            })
            .collect(),
        stages: seg
            .snapshots
            .iter()
            .map(|(stage, _)| StageLink {
                stage: stage.name(),
                url: format!("/thermograms/{id}/stages/{}.png", stage.name()),
            })
            .collect(),
    };
    Ok(json_bytes(StatusCode::OK, &summary))
}

async fn modules(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let mut e = entry.lock().await;
    let seg = segmentation(&id, &mut e).await?;
    Ok(json_bytes(StatusCode::OK, &RegionsDoc::new(&e.thermogram, &seg)))
}

async fn overlay(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let mut e = entry.lock().await;
    let seg = segmentation(&id, &mut e).await?;
    let t = e.thermogram.clone();
    let report = e.analysis.as_ref().map(|(_, r)| r.clone());
    drop(e);
    let bytes = blocking(move || {
        render::overlay_png(&t, &seg, report.as_deref()).map_err(|e| ApiError::internal(e.to_string()))
    })
    .await?;
    Ok(png(bytes))
}

async fn analyze(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let mut cfg: AnalysisConfig = parse_body(&body)?;
    if let Some(bins) = query_usize(&q, "bins")? {
        cfg.bins = bins;
    }
    cfg.validate()?;
    let mut e = entry.lock().await;
    let seg = segmentation(&id, &mut e).await?;
    if let Some((done, report)) = &e.analysis {
        if *done == cfg {
            return Ok(json_bytes(StatusCode::OK, report.as_ref()));
        }
    }
    let t = e.thermogram.clone();
    let (s, i, c) = (store.clone(), id.clone(), cfg.clone());
    let report = blocking(move || {
        let report = analysis::analyze(&t, &seg, &c)?;
        s.persist_analysis(&i, &c, &report)?;
        Ok(report)
    })
    .await?;
    tracing::info!(%id, suspects = report.summary.suspect_count, "analyzed");
    let response = json_bytes(StatusCode::OK, &report);
    e.analysis = Some((cfg, Arc::new(report)));
    Ok(response)
}

async fn histogram(State(store): State<Arc<Store>>, Path((id, label)): Path<(String, String)>) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let label: u32 = label
        .parse()
        .map_err(|_| ApiError::bad_request("BadLabel", format!("label must be a positive integer, got {label:?}")))?;
    let e = entry.lock().await;
    let (_, report) = e.analysis.as_ref().ok_or_else(|| {
        ApiError::new(StatusCode::CONFLICT, "NotAnalyzed", format!("thermogram {id} has not been analyzed"))
    })?;
    let module = report
        .module(label)
        .ok_or_else(|| ApiError::not_found("LabelNotFound", format!("no module with label {label}")))?;
    Ok(json_bytes(StatusCode::OK, &HistogramDoc::from(module)))
}

async fn stage(State(store): State<Arc<Store>>, Path((id, file)): Path<(String, String)>) -> ApiResult<Response> {
    let entry = lookup(&store, &id)?;
    let stage = file
        .strip_suffix(".png")
        .and_then(Stage::from_name)
        .ok_or_else(|| ApiError::not_found("UnknownStage", format!("no stage image {file:?}")))?;
    let mut e = entry.lock().await;
    let seg = segmentation(&id, &mut e).await?;
    drop(e);
    let bytes = blocking(move || {
        let snap = seg
            .snapshot(stage)
            .ok_or_else(|| ApiError::internal(format!("stage {} was not recorded", stage.name())))?;
        snap.to_png().map_err(|e| ApiError::internal(e.to_string()))
    })
    .await?;
    Ok(png(bytes))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(bind: SocketAddr, store: Store) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| CliError::io(bind.to_string(), e))?;
    let local = listener.local_addr().map_err(|e| CliError::io(bind.to_string(), e))?;
    tracing::info!(addr = %local, store = %store.root().display(), "listening");
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::io(local.to_string(), e))
}
