use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use flimreg_core::datamodel::{
    encode_plane, encode_png, save_rgb, Hypercube, HypercubeManifest, HypercubeRef, RgbImage, WsiRef,
};
use flimreg_core::imaging::{crop, render_intensity, resize_rgb, LifetimeRenderSpec};
use flimreg_core::pipeline::{
    band_for_wavelength, blend_with_slide, false_histology, lifetime_mosaic, placement_of, prepare_registration,
    preview, probe_tiles, register_tile, render_tile, tile_planes, TileOptions, DEFAULT_WAVELENGTH_NM,
};
use flimreg_core::registration::{EpochProgress, RegressionParams};
use flimreg_core::stitching::{save_mosaic, PatchRect, ProbeRow, StitchOptions, TilePlacement, DEFAULT_BAND_RANGE, DEFAULT_PROBE_WINDOW};
use flimreg_core::translation::TranslatorConfig;
use futures::StreamExt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ApiError, ApiResult};
use crate::jobs::{Job, JobEvent, JobKind, JobSnapshot, Progress};
use crate::state::{AppState, Artifact, JobEntry, Project};

/// Regions larger than this many output pixels are served downsampled.
pub const MAX_REGION_PIXELS: f64 = 4096.0 * 4096.0;
pub const APPLIED_SCALE_HEADER: &str = "x-applied-scale";

type AppStateRef = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/projects", post(create_project))
        .route("/projects/{p}", get(get_project))
        .route("/projects/{p}/wsi", post(set_wsi))
        .route("/projects/{p}/wsi/{wsi}/region", get(wsi_region))
        .route("/projects/{p}/tiles", post(add_tile))
        .route("/projects/{p}/tiles/{t}/plane", get(tile_plane))
        .route("/projects/{p}/jobs", post(create_job))
        .route("/projects/{p}/jobs/{j}", get(get_job))
        .route("/projects/{p}/jobs/{j}/events", get(job_events))
        .route("/projects/{p}/jobs/{j}/preview", get(job_preview))
        .route("/projects/{p}/jobs/{j}/result", get(job_result))
        .route("/projects/{p}/jobs/{j}/accept", post(accept_job))
        .route("/projects/{p}/stitch", post(create_stitch))
        .route("/projects/{p}/probe", get(probe))
        .with_state(state)
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn body(b: Result<Json<Value>, JsonRejection>) -> ApiResult<Value> {
    b.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

/// Parses `obj[name]`, reporting failures against that field.
fn field<T: DeserializeOwned>(obj: &Value, name: &str) -> ApiResult<Option<T>> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| ApiError::validation(name, e.to_string())),
    }
}

fn required<T: DeserializeOwned>(obj: &Value, name: &str) -> ApiResult<T> {
    field(obj, name)?.ok_or_else(|| ApiError::validation(name, format!("`{name}` is required")))
}

fn png(img: &RgbImage) -> ApiResult<Response> {
    Ok(([(header::CONTENT_TYPE, "image/png")], encode_png(img)?).into_response())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

async fn index() -> Json<Value> {
    Json(serde_json::json!({ "service": "flimreg", "version": env!("CARGO_PKG_VERSION") }))
}

async fn create_project(State(app): AppStateRef) -> ApiResult<(StatusCode, Json<Value>)> {
    let p = app.create_project()?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "id": p.id, "session": p.read_session() }))))
}

async fn get_project(State(app): AppStateRef, Path(p): Path<String>) -> ApiResult<Json<Value>> {
    let project = app.project(&p)?;
    Ok(Json(serde_json::json!({ "id": project.id, "session": project.read_session() })))
}

fn wsi_id(path: &std::path::Path) -> String {
    path.file_stem().map_or_else(|| "wsi".to_string(), |s| s.to_string_lossy().into_owned())
}

#[derive(Serialize)]
struct WsiInfo {
    wsi_id: String,
    width: u32,
    height: u32,
}

async fn set_wsi(
    State(app): AppStateRef,
    Path(p): Path<String>,
    b: Result<Json<Value>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<WsiInfo>)> {
    let project = app.project(&p)?;
    let path: PathBuf = required(&body(b)?, "path")?;
    let (width, height) = {
        let path = path.clone();
        blocking(move || Ok(flimreg_core::datamodel::load_rgb(&path).map_err(|e| ApiError::from(e).with_field("path"))?.dimensions())).await?
    };
    project.update_session(|s| {
        s.wsi = Some(WsiRef { path: path.clone(), width, height });
        s.validate()?;
        Ok(())
    })?;
    Ok((StatusCode::CREATED, Json(WsiInfo { wsi_id: wsi_id(&path), width, height })))
}

#[derive(Deserialize)]
struct RegionQuery {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    scale: Option<f64>,
}

async fn wsi_region(
    State(app): AppStateRef,
    Path((p, wsi)): Path<(String, String)>,
    q: Result<Query<RegionQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query(q)?;
    let project = app.project(&p)?;
    let current = project.read_session().wsi.ok_or_else(|| ApiError::unknown("Wsi", &wsi))?;
    if wsi_id(&current.path) != wsi {
        return Err(ApiError::unknown("Wsi", &wsi));
    }
    let rect = PatchRect::new(q.x, q.y, q.w, q.h);
    rect.validate_within(current.width, current.height)?;
    let requested = q.scale.unwrap_or(1.0);
    if !(requested > 0.0 && requested.is_finite()) {
        return Err(ApiError::validation("scale", "must be positive"));
    }
    let area = f64::from(q.w) * f64::from(q.h);
    let scale = if area * requested * requested > MAX_REGION_PIXELS { (MAX_REGION_PIXELS / area).sqrt() } else { requested };
    let img = blocking(move || {
        let slide = project.slide()?;
        let region = crop(&slide, &rect)?;
        let w = ((f64::from(q.w) * scale).round() as usize).max(1);
        let h = ((f64::from(q.h) * scale).round() as usize).max(1);
        Ok(if (w, h) == (q.w as usize, q.h as usize) { region } else { resize_rgb(&region, w, h)? })
    })
    .await?;
    let mut resp = png(&img)?;
    resp.headers_mut().insert(APPLIED_SCALE_HEADER, HeaderValue::from_str(&scale.to_string()).expect("ascii"));
    Ok(resp)
}

#[derive(Serialize)]
struct TileInfo {
    tile_id: String,
    width: usize,
    height: usize,
    spectral_bins: usize,
    time_bins: usize,
}

async fn add_tile(
    State(app): AppStateRef,
    Path(p): Path<String>,
    b: Result<Json<Value>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<TileInfo>)> {
    let project = app.project(&p)?;
    let b = body(b)?;
    let id: String = required(&b, "id")?;
    if id.is_empty() || id.contains(['/', '\\']) {
        return Err(ApiError::validation("id", "tile id must be a non-empty plain name"));
    }
    let manifest_path: PathBuf = required(&b, "manifest")?;
    let manifest = HypercubeManifest::read(&manifest_path).map_err(|e| ApiError::from(e).with_field("manifest"))?;
    let data = manifest.resolve_data_path(&manifest_path);
    let len = std::fs::metadata(&data).map_err(|_| ApiError::validation("manifest", format!("missing data file {}", data.display())))?.len();
    manifest.check_data_len(len).map_err(|e| ApiError::from(e).with_field("manifest"))?;
    project.update_session(|s| {
        s.hypercubes.retain(|h| h.tile_id != id);
        s.hypercubes.push(HypercubeRef { tile_id: id.clone(), manifest: manifest_path.clone() });
        Ok(())
    })?;
    let info = TileInfo {
        tile_id: id,
        width: manifest.width,
        height: manifest.height,
        spectral_bins: manifest.spectral_bins,
        time_bins: manifest.time_bins,
    };
    Ok((StatusCode::CREATED, Json(info)))
}

fn resolve_band(cube: &Hypercube, band: Option<usize>, wavelength: Option<f64>) -> ApiResult<usize> {
    match band {
        Some(b) if b >= cube.spectral_bins() => {
            Err(ApiError::validation("band", format!("band {b} outside 0..{}", cube.spectral_bins())))
        }
        Some(b) => Ok(b),
        None => Ok(band_for_wavelength(cube, wavelength.unwrap_or(DEFAULT_WAVELENGTH_NM))),
    }
}

#[derive(Deserialize)]
struct PlaneQuery {
    band: Option<usize>,
    wavelength_nm: Option<f64>,
    kind: Option<String>,
    render: Option<bool>,
}

async fn tile_plane(
    State(app): AppStateRef,
    Path((p, t)): Path<(String, String)>,
    q: Result<Query<PlaneQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query(q)?;
    let project = app.project(&p)?;
    let lifetime = match q.kind.as_deref() {
        None | Some("lifetime") | Some("lifetime_ns") => true,
        Some("intensity") | Some("intensity_counts") => false,
        Some(other) => return Err(ApiError::validation("kind", format!("unknown plane kind `{other}`"))),
    };
    blocking(move || {
        let cube = project.cube(&t)?;
        let band = resolve_band(&cube, q.band, q.wavelength_nm)?;
        let opts = TileOptions::default();
        let planes = tile_planes(&cube, band, &opts, None)?;
        match (q.render.unwrap_or(true), lifetime) {
            (true, true) => png(&render_tile(&planes, &opts.render)?),
            (true, false) => png(&render_intensity(&planes.intensity)),
            (false, l) => {
                let plane = if l { &planes.lifetime } else { &planes.intensity };
                Ok(([(header::CONTENT_TYPE, "application/octet-stream")], encode_plane(plane)).into_response())
            }
        }
    })
    .await
}

#[derive(Serialize)]
struct JobCreated {
    #[serde(flatten)]
    job: JobSnapshot,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<RegressionParams>,
}

fn new_entry(project: &Project, kind: JobKind) -> (Arc<JobEntry>, String) {
    let id = project.new_job_id();
    let entry = Arc::new(JobEntry { job: Job::new(id.clone(), kind), artifact: Mutex::new(None) });
    project.insert_job(entry.clone());
    (entry, id)
}

fn job_failure(e: impl std::fmt::Display) -> String {
    e.to_string()
}

async fn create_job(
    State(app): AppStateRef,
    Path(p): Path<String>,
    b: Result<Json<Value>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<JobCreated>)> {
    let project = app.project(&p)?;
    let b = body(b)?;
    let kind: JobKind = required(&b, "kind")?;
    if kind == JobKind::Stitch {
        return Err(ApiError::validation("kind", "stitch jobs are created via POST /projects/{p}/stitch"));
    }
    let tile_id: String = required(&b, "tile_id")?;
    let translator: TranslatorConfig = required(&b, "translator")?;
    let band: Option<usize> = field(&b, "band")?;
    let wavelength: Option<f64> = field(&b, "wavelength_nm")?;
    let opts: TileOptions = field(&b, "tile")?.unwrap_or_default();
    opts.render.validate()?;
    let params: RegressionParams = field(&b, "params")?.unwrap_or_default();
    params.validate()?;

    let session = project.read_session();
    if session.hypercube(&tile_id).is_none() {
        return Err(ApiError::unknown("Tile", &tile_id).with_field("tile_id"));
    }
    let patch = if kind == JobKind::Register {
        let patch: PatchRect = required(&b, "patch")?;
        let wsi = session.wsi.as_ref().ok_or_else(|| ApiError::validation("wsi", "project has no slide yet"))?;
        patch.validate_within(wsi.width, wsi.height)?;
        Some(patch)
    } else {
        None
    };

    let (entry, id) = new_entry(&project, kind);
    let created = JobCreated { job: entry.job.snapshot(), params: (kind == JobKind::Register).then(|| params.clone()) };
    let worker_entry = entry.clone();
    app.pool.submit(entry.job.clone(), move |job| {
        let dir = project.job_dir(&id);
        std::fs::create_dir_all(&dir).map_err(job_failure)?;
        let cube = project.cube(&tile_id).map_err(job_failure)?;
        let band = resolve_band(&cube, band, wavelength).map_err(job_failure)?;
        match patch {
            Some(patch) => {
                let slide = project.slide().map_err(job_failure)?;
                let inputs = prepare_registration(&cube, band, &opts, &translator, &tile_id, &slide, &patch)
                    .map_err(job_failure)?;
                let sink = |e: &EpochProgress| job.progress(Progress { epoch: e.epoch, loss: e.loss });
                let result = register_tile(&inputs, &params, &sink, &tile_id, &patch).map_err(job_failure)?;
                let json = serde_json::to_vec_pretty(&result).map_err(job_failure)?;
                std::fs::write(dir.join("result.json"), json).map_err(job_failure)?;
                save_rgb(&inputs.moving, &dir.join("moving.png")).map_err(job_failure)?;
                save_rgb(&inputs.target, &dir.join("target.png")).map_err(job_failure)?;
                worker_entry.set_artifact(Artifact::Registration { result, inputs });
                Ok(format!("jobs/{id}/result.json"))
            }
            None => {
                let planes = tile_planes(&cube, band, &opts, None).map_err(job_failure)?;
                let render = render_tile(&planes, &opts.render).map_err(job_failure)?;
                let img = false_histology(&render, &planes.intensity, &translator, &tile_id).map_err(job_failure)?;
                let out = dir.join("false_histology.png");
                save_rgb(&img, &out).map_err(job_failure)?;
                worker_entry.set_artifact(Artifact::Image { png: out });
                Ok(format!("jobs/{id}/false_histology.png"))
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(created)))
}

async fn get_job(State(app): AppStateRef, Path((p, j)): Path<(String, String)>) -> ApiResult<Json<JobSnapshot>> {
    Ok(Json(app.project(&p)?.job(&j)?.job.snapshot()))
}

#[derive(Deserialize)]
struct EventsQuery {
    from: Option<usize>,
}

fn sse_event(index: usize, e: JobEvent) -> Result<Event, Infallible> {
    let ev = match e {
        JobEvent::Progress(p) => Event::default().event("progress").json_data(p),
        JobEvent::Finished(s) => {
            let name = if s.state == crate::jobs::JobState::Done { "done" } else { "failed" };
            Event::default().event(name).json_data(s)
        }
    };
    Ok(ev.expect("event payloads serialise").id(index.to_string()))
}

/// Replays the job's events from the start (or from `?from=` /
/// `Last-Event-ID`), then follows live until the terminal event.
async fn job_events(
    State(app): AppStateRef,
    Path((p, j)): Path<(String, String)>,
    headers: HeaderMap,
    q: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    let entry = app.project(&p)?.job(&j)?;
    let resume = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok()?.parse::<usize>().ok())
        .map(|last| last + 1);
    let start = q.from.or(resume).unwrap_or(0);
    let stream = futures::stream::unfold((entry, start, false), |(entry, next, finished)| async move {
        if finished {
            return None;
        }
        let batch = entry.job.events_from(next).await;
        let done = batch.iter().any(|e| matches!(e, JobEvent::Finished(_)));
        let n = batch.len();
        let events: Vec<_> = batch.into_iter().enumerate().map(|(i, e)| sse_event(next + i, e)).collect();
        Some((futures::stream::iter(events), (entry, next + n, done)))
    })
    .flatten();
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

fn finished_artifact(entry: &JobEntry, id: &str) -> ApiResult<Arc<Artifact>> {
    let snap = entry.job.snapshot();
    if snap.state != crate::jobs::JobState::Done {
        return Err(ApiError::job_not_done(id));
    }
    entry.artifact().ok_or_else(|| ApiError::job_not_done(id))
}

#[derive(Deserialize)]
struct PreviewQuery {
    alpha: Option<f64>,
    mode: Option<String>,
}

async fn job_preview(
    State(app): AppStateRef,
    Path((p, j)): Path<(String, String)>,
    q: Result<Query<PreviewQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query(q)?;
    let entry = app.project(&p)?.job(&j)?;
    let gray = match q.mode.as_deref() {
        None | Some("color") | Some("colour") | Some("rgb") => false,
        Some("gray") | Some("grey") => true,
        Some(other) => return Err(ApiError::validation("mode", format!("unknown mode `{other}`"))),
    };
    let alpha = q.alpha.unwrap_or(0.5);
    let artifact = finished_artifact(&entry, &j)?;
    let Artifact::Registration { result, inputs } = artifact.as_ref() else {
        return Err(ApiError::validation("job", "only registration jobs have previews"));
    };
    png(&preview(&inputs.moving, &inputs.patch_image, result, alpha, gray)?)
}

async fn job_result(State(app): AppStateRef, Path((p, j)): Path<(String, String)>) -> ApiResult<Response> {
    let entry = app.project(&p)?.job(&j)?;
    match finished_artifact(&entry, &j)?.as_ref() {
        Artifact::Registration { result, .. } => Ok(Json(result).into_response()),
        Artifact::Image { png } => {
            let bytes = std::fs::read(png).map_err(|e| ApiError::internal(e.to_string()))?;
            Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
        }
    }
}

#[derive(Serialize)]
struct Accepted {
    placement: TilePlacement,
    changed: bool,
}

async fn accept_job(State(app): AppStateRef, Path((p, j)): Path<(String, String)>) -> ApiResult<Json<Accepted>> {
    let project = app.project(&p)?;
    let entry = project.job(&j)?;
    let artifact = finished_artifact(&entry, &j)?;
    let Artifact::Registration { result, .. } = artifact.as_ref() else {
        return Err(ApiError::validation("job", "only registration jobs can be accepted"));
    };
    let placement = placement_of(result)?;
    let changed = project.update_session(|s| Ok(s.accept(&j, placement.clone())?))?;
    Ok(Json(Accepted { placement, changed }))
}

async fn create_stitch(
    State(app): AppStateRef,
    Path(p): Path<String>,
    b: Result<Json<Value>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<JobSnapshot>)> {
    let project = app.project(&p)?;
    let b = body(b)?;
    let band: Option<usize> = field(&b, "band")?;
    let wavelength: Option<f64> = field(&b, "wavelength_nm")?;
    let render: LifetimeRenderSpec = field(&b, "render")?.unwrap_or_default();
    render.validate()?;
    let scale: f64 = field(&b, "scale")?.unwrap_or(1.0);
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(ApiError::validation("scale", "must lie in (0, 1]"));
    }
    let blend_alpha: Option<f64> = field(&b, "blend_alpha")?;
    if blend_alpha.is_some_and(|a| !(0.0..=1.0).contains(&a)) {
        return Err(ApiError::validation("blend_alpha", "must lie in [0, 1]"));
    }
    let background: bool = field(&b, "background")?.unwrap_or(false);
    let tile: TileOptions = field(&b, "tile")?.unwrap_or_default();

    let session = project.read_session();
    let wsi = session.wsi.clone().ok_or_else(|| ApiError::validation("wsi", "project has no slide yet"))?;
    if session.placements.is_empty() {
        return Err(ApiError::validation("placements", "no accepted registrations to stitch"));
    }
    let (entry, id) = new_entry(&project, JobKind::Stitch);
    let worker_entry = entry.clone();
    app.pool.submit(entry.job.clone(), move |_| {
        let placements = project.read_session().placements;
        let mut planes = std::collections::BTreeMap::new();
        for pl in &placements {
            let cube = project.cube(&pl.tile_id).map_err(job_failure)?;
            let b = resolve_band(&cube, band, wavelength).map_err(job_failure)?;
            planes.insert(pl.tile_id.clone(), tile_planes(&cube, b, &tile, None).map_err(job_failure)?);
        }
        let canvas = (
            ((f64::from(wsi.width) * scale).round() as usize).max(1),
            ((f64::from(wsi.height) * scale).round() as usize).max(1),
        );
        let opts = StitchOptions { scale, render, ..StitchOptions::new(canvas) };
        let slide = if background || blend_alpha.is_some() { Some(project.slide().map_err(job_failure)?) } else { None };
        let bg = match (&slide, background) {
            (Some(s), true) => Some(resize_rgb(s, canvas.0, canvas.1).map_err(job_failure)?),
            _ => None,
        };
        let mut mosaic = lifetime_mosaic(&placements, &planes, &opts, bg.as_ref()).map_err(job_failure)?;
        if let (Some(alpha), Some(s)) = (blend_alpha, &slide) {
            mosaic.image = blend_with_slide(&mosaic.image, s, alpha).map_err(job_failure)?;
        }
        let dir = project.job_dir(&id);
        std::fs::create_dir_all(&dir).map_err(job_failure)?;
        let out = dir.join("mosaic.png");
        save_mosaic(&mosaic, &opts, &placements, &out).map_err(job_failure)?;
        worker_entry.set_artifact(Artifact::Image { png: out });
        Ok(format!("jobs/{id}/mosaic.png"))
    });
    Ok((StatusCode::ACCEPTED, Json(entry.job.snapshot())))
}

#[derive(Deserialize)]
struct ProbeQuery {
    x: f64,
    y: f64,
    band_min: Option<f64>,
    band_max: Option<f64>,
    window: Option<usize>,
    format: Option<String>,
}

#[derive(Serialize)]
struct ProbeResponse {
    x: f64,
    y: f64,
    window: usize,
    rows: Vec<ProbeRow>,
}

async fn probe(
    State(app): AppStateRef,
    Path(p): Path<String>,
    q: Result<Query<ProbeQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query(q)?;
    let project = app.project(&p)?;
    let window = q.window.unwrap_or(DEFAULT_PROBE_WINDOW);
    let range = (q.band_min.unwrap_or(DEFAULT_BAND_RANGE.0), q.band_max.unwrap_or(DEFAULT_BAND_RANGE.1));
    let csv = match q.format.as_deref() {
        None | Some("json") => false,
        Some("csv") => true,
        Some(other) => return Err(ApiError::validation("format", format!("unknown format `{other}`"))),
    };
    let (x, y) = (q.x, q.y);
    let rows = blocking(move || {
        let placements = project.read_session().placements;
        let mut cubes = std::collections::BTreeMap::new();
        for pl in &placements {
            cubes.insert(pl.tile_id.clone(), (*project.cube(&pl.tile_id)?).clone());
        }
        Ok(probe_tiles((x, y), &placements, &cubes, range, window, &TileOptions::default())?)
    })
    .await?;
    if csv {
        let mut out = Vec::new();
        flimreg_core::stitching::write_probe_csv(&rows, &mut out).map_err(|e| ApiError::internal(e.to_string()))?;
        return Ok(([(header::CONTENT_TYPE, "text/csv")], out).into_response());
    }
    Ok(Json(ProbeResponse { x, y, window, rows }).into_response())
}
