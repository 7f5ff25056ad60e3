use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use flimreg_core::datamodel::{
    load_hypercube, load_plane, load_rgb, save_plane, save_rgb, Hypercube, HypercubeManifest, HypercubeRef,
    ProjectSession, WsiRef, PROJECT_FILE,
};
use flimreg_core::imaging::{mask_background, render_lifetime, resize_rgb, LifetimeRenderSpec};
use flimreg_core::pipeline::{
    band_for_wavelength, blend_with_slide, false_histology, lifetime_mosaic, placement_of, prepare_registration,
    preview, probe_tiles, register_tile, render_tile, tile_planes, TileOptions, TilePlanes, DEFAULT_WAVELENGTH_NM,
};
use flimreg_core::registration::{regress, warp_rgb, EpochProgress, RegressionResult};
use flimreg_core::stitching::{save_mosaic, write_probe_csv, StitchOptions};
use flimreg_core::translation::translate;
use serde_json::{json, Value};

use crate::args::*;

/// Prints `body` tagged with `schema` when JSON output is on, else runs `human`.
fn emit(json_out: bool, schema: &str, mut body: Value, human: impl FnOnce()) -> Result<()> {
    if json_out {
        if let Value::Object(map) = &mut body {
            map.insert("schema".into(), Value::String(format!("flimreg.{schema}/v1")));
        }
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        human();
    }
    Ok(())
}

fn band_of(cube: &Hypercube, sel: &BandSelect) -> Result<usize> {
    match sel.band {
        Some(b) if b >= cube.spectral_bins() => bail!("band {b} outside 0..{}", cube.spectral_bins()),
        Some(b) => Ok(b),
        None => Ok(band_for_wavelength(cube, sel.wavelength.unwrap_or(DEFAULT_WAVELENGTH_NM))),
    }
}

fn tile_options(t: &TileArgs) -> TileOptions {
    TileOptions { smooth_window: t.smooth_window, filter: !t.no_filter, ..TileOptions::default() }
}

fn load_session(dir: &Path) -> Result<ProjectSession> {
    let path = dir.join(PROJECT_FILE);
    ProjectSession::load(&path).with_context(|| format!("loading {}", path.display()))
}

/// Session paths are stored absolute so projects can be used from anywhere.
fn absolute(p: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(p).with_context(|| format!("{} not found", p.display()))
}

/// FNV-1a 64-bit.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn reconstruct(a: &ReconstructArgs, json_out: bool) -> Result<()> {
    let cube = load_hypercube(&a.cube).with_context(|| format!("loading {}", a.cube.display()))?;
    let bands: Vec<usize> = if a.all_bands { (0..cube.spectral_bins()).collect() } else { vec![band_of(&cube, &a.band)?] };
    let opts = TileOptions { smooth_window: a.smooth_window, filter: a.filter, ..TileOptions::default() };
    let stem = a.cube.file_stem().map_or_else(|| "cube".into(), |s| s.to_string_lossy().into_owned());
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut written = Vec::new();
    for band in bands {
        let planes = tile_planes(&cube, band, &opts, None)?;
        let ip = a.out.join(format!("{stem}_b{band:03}_intensity.plane"));
        let lp = a.out.join(format!("{stem}_b{band:03}_lifetime.plane"));
        save_plane(&planes.intensity, &ip)?;
        save_plane(&planes.lifetime, &lp)?;
        written.push(json!({
            "band": band,
            "wavelength_nm": cube.wavelength_of(band),
            "intensity": ip,
            "lifetime": lp,
            "filter": planes.filter,
        }));
    }
    let n = written.len();
    emit(json_out, "reconstruct", json!({ "cube": a.cube, "planes": written }), || {
        println!("wrote {n} band(s) to {}", a.out.display())
    })
}

pub fn mask_bg(a: &MaskBgArgs, json_out: bool) -> Result<()> {
    let img = load_rgb(&a.input)?;
    let (masked, mask) = mask_background(&img)?;
    save_rgb(&masked, &a.out)?;
    if let Some(m) = &a.mask_out {
        mask.to_luma().save(m).with_context(|| format!("writing {}", m.display()))?;
    }
    let fg = mask.count_set();
    let total = mask.width() * mask.height();
    emit(json_out, "mask-bg", json!({ "out": a.out, "foreground_pixels": fg, "total_pixels": total }), || {
        println!("{fg}/{total} foreground pixels -> {}", a.out.display())
    })
}

pub fn render(a: &RenderArgs, json_out: bool) -> Result<()> {
    let lifetime = load_plane(&a.lifetime)?;
    let spec = LifetimeRenderSpec { range_min: a.range.0, range_max: a.range.1, colormap: a.colormap, weighting: a.weighting };
    let img = match &a.intensity {
        Some(p) => render_tile(&TilePlanes { intensity: load_plane(p)?, lifetime, filter: None }, &spec)?,
        None => render_lifetime(&lifetime, None, &spec)?,
    };
    save_rgb(&img, &a.out)?;
    emit(json_out, "render", json!({ "out": a.out, "render": spec }), || println!("wrote {}", a.out.display()))
}

pub fn translate_cmd(a: &TranslateArgs, json_out: bool) -> Result<()> {
    let render = load_rgb(&a.input)?;
    let tile_id = a
        .tile_id
        .clone()
        .unwrap_or_else(|| a.input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()));
    let img = match &a.intensity {
        Some(p) => false_histology(&render, &load_plane(p)?, &a.translator, &tile_id)?,
        None => translate(&render, &a.translator, &tile_id)?,
    };
    save_rgb(&img, &a.out)?;
    emit(json_out, "translate", json!({ "out": a.out, "translator": a.translator, "tile_id": tile_id }), || {
        println!("wrote {}", a.out.display())
    })
}

fn log_epoch(p: &EpochProgress) {
    log::debug!("epoch {} loss {:.6} lr {}", p.epoch, p.loss, p.lr);
}

pub fn register(a: &RegisterArgs, json_out: bool) -> Result<()> {
    let params = a.params.params();
    let (result, warped) = match (&a.moving, &a.target, &a.project) {
        (Some(m), Some(t), _) => {
            let moving = load_rgb(m)?;
            let target = load_rgb(t)?;
            let result = regress(&moving, &target, &params, &log_epoch)?;
            let warped = match &a.warped {
                Some(_) => Some(warp_rgb(&moving, &result.homography.inverse()?, (target.width() as usize, target.height() as usize))?),
                None => None,
            };
            (result, warped)
        }
        (_, _, Some(dir)) => {
            let session = load_session(dir)?;
            let tile = a.tile.as_deref().expect("clap requires --tile");
            let patch = a.patch.expect("clap requires --patch");
            let translator = a.translator.as_ref().expect("clap requires --translator");
            let wsi = session.wsi.as_ref().context("project has no slide (use `project init --wsi`)")?;
            patch.validate_within(wsi.width, wsi.height)?;
            let href = session.hypercube(tile).with_context(|| format!("project has no tile `{tile}`"))?;
            let cube = load_hypercube(&href.manifest)?;
            let slide = load_rgb(&wsi.path)?;
            let band = band_of(&cube, &a.band)?;
            let inputs = prepare_registration(&cube, band, &tile_options(&a.tile_opts), translator, tile, &slide, &patch)?;
            let result = register_tile(&inputs, &params, &log_epoch, tile, &patch)?;
            let warped = match &a.warped {
                Some(_) => Some(preview(&inputs.moving, &inputs.patch_image, &result, 1.0, false)?),
                None => None,
            };
            (result, warped)
        }
        _ => bail!("give either --moving and --target, or --project with --tile, --patch and --translator"),
    };
    if let (Some(path), Some(img)) = (&a.warped, &warped) {
        save_rgb(img, path)?;
    }
    if let Some(out) = &a.out {
        std::fs::write(out, serde_json::to_vec_pretty(&result)?).with_context(|| format!("writing {}", out.display()))?;
    }
    let body = serde_json::to_value(&result)?;
    emit(json_out, "register", body, || print_result(&result))
}

fn print_result(r: &RegressionResult) {
    println!("final loss {:.6} (best epoch {})", r.final_loss, r.best_epoch);
    println!("homography {:?}", r.homography);
    if let Some(m) = &r.metrics {
        println!("metrics {}", serde_json::to_string(m).unwrap_or_default());
    }
}

pub fn stitch(a: &StitchArgs, json_out: bool) -> Result<()> {
    let session = load_session(&a.project)?;
    let wsi = session.wsi.clone().context("project has no slide")?;
    if session.placements.is_empty() {
        bail!("project has no accepted placements");
    }
    if !(a.scale > 0.0 && a.scale <= 1.0) {
        bail!("--scale must lie in (0, 1]");
    }
    let tile_opts = tile_options(&a.tile_opts);
    let mut planes = BTreeMap::new();
    for p in &session.placements {
        let href = session.hypercube(&p.tile_id).with_context(|| format!("no hypercube for `{}`", p.tile_id))?;
        let cube = load_hypercube(&href.manifest)?;
        let band = band_of(&cube, &a.band)?;
        planes.insert(p.tile_id.clone(), tile_planes(&cube, band, &tile_opts, None)?);
    }
    let canvas = (
        ((f64::from(wsi.width) * a.scale).round() as usize).max(1),
        ((f64::from(wsi.height) * a.scale).round() as usize).max(1),
    );
    let render =
        LifetimeRenderSpec { range_min: a.render_range.0, range_max: a.render_range.1, colormap: a.colormap, weighting: a.weighting };
    render.validate()?;
    let opts = StitchOptions { scale: a.scale, render, ..StitchOptions::new(canvas) };
    let slide = if a.background || a.blend_alpha.is_some() { Some(load_rgb(&wsi.path)?) } else { None };
    let bg = match (&slide, a.background) {
        (Some(s), true) => Some(resize_rgb(s, canvas.0, canvas.1)?),
        _ => None,
    };
    let mut mosaic = lifetime_mosaic(&session.placements, &planes, &opts, bg.as_ref())?;
    if let (Some(alpha), Some(s)) = (a.blend_alpha, &slide) {
        mosaic.image = blend_with_slide(&mosaic.image, s, alpha)?;
    }
    let sidecar = save_mosaic(&mosaic, &opts, &session.placements, &a.out)?;
    let covered = mosaic.coverage.counts.iter().filter(|&&c| c > 0).count();
    let body = json!({ "out": a.out, "sidecar": sidecar, "canvas": canvas, "tiles": planes.len(), "covered_pixels": covered });
    emit(json_out, "stitch", body, || println!("wrote {} ({covered} covered pixels)", a.out.display()))
}

pub fn probe(a: &ProbeArgs, json_out: bool) -> Result<()> {
    let session = load_session(&a.project)?;
    let mut cubes = BTreeMap::new();
    for p in &session.placements {
        let href = session.hypercube(&p.tile_id).with_context(|| format!("no hypercube for `{}`", p.tile_id))?;
        cubes.insert(p.tile_id.clone(), load_hypercube(&href.manifest)?);
    }
    let rows =
        probe_tiles((a.x, a.y), &session.placements, &cubes, (a.band_min, a.band_max), a.window, &tile_options(&a.tile_opts))?;
    if let Some(out) = &a.out {
        let f = std::fs::File::create(out).with_context(|| format!("writing {}", out.display()))?;
        write_probe_csv(&rows, std::io::BufWriter::new(f))?;
    }
    let body = json!({ "x": a.x, "y": a.y, "window": a.window, "band_range": [a.band_min, a.band_max], "rows": rows });
    emit(json_out, "probe", body, || {
        if a.out.is_none() {
            let _ = write_probe_csv(&rows, std::io::stdout().lock());
        }
    })
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let mut cfg = flimreg_service::ServiceConfig::from_env().map_err(anyhow::Error::msg)?;
    if let Some(addr) = a.addr {
        cfg.addr = addr;
    }
    if let Some(d) = &a.data {
        cfg.data_dir = d.clone();
    }
    if let Some(w) = a.workers {
        cfg.workers = w.max(1);
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(flimreg_service::serve(cfg))
}

pub fn project(cmd: &ProjectCommand, json_out: bool) -> Result<()> {
    match cmd {
        ProjectCommand::Init { dir, wsi } => {
            let path = dir.join(PROJECT_FILE);
            if path.exists() {
                bail!("{} already exists", path.display());
            }
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut session = ProjectSession::default();
            if let Some(w) = wsi {
                let (width, height) = load_rgb(w)?.dimensions();
                session.wsi = Some(WsiRef { path: absolute(w)?, width, height });
            }
            session.save_atomic(&path)?;
            emit(json_out, "project", serde_json::to_value(&session)?, || println!("created {}", path.display()))
        }
        ProjectCommand::AddTile { dir, id, manifest } => {
            let m = HypercubeManifest::read(manifest)?;
            let data = m.resolve_data_path(manifest);
            let len = std::fs::metadata(&data).with_context(|| format!("missing data file {}", data.display()))?.len();
            m.check_data_len(len)?;
            let mut session = load_session(dir)?;
            session.hypercubes.retain(|h| h.tile_id != *id);
            session.hypercubes.push(HypercubeRef { tile_id: id.clone(), manifest: absolute(manifest)? });
            session.save_atomic(&dir.join(PROJECT_FILE))?;
            emit(json_out, "project", serde_json::to_value(&session)?, || println!("added tile {id}"))
        }
        ProjectCommand::Accept { dir, result } => {
            let bytes = std::fs::read(result).with_context(|| format!("reading {}", result.display()))?;
            let parsed: RegressionResult = serde_json::from_slice(&bytes).context("parsing registration result")?;
            let placement = placement_of(&parsed)?;
            let reg_id = format!("reg-{:016x}", fnv1a(&bytes));
            let mut session = load_session(dir)?;
            if session.hypercube(&placement.tile_id).is_none() {
                bail!("project has no tile `{}`", placement.tile_id);
            }
            let changed = session.accept(&reg_id, placement)?;
            if changed {
                session.save_atomic(&dir.join(PROJECT_FILE))?;
            }
            let body = json!({ "registration_id": reg_id, "changed": changed, "session": session });
            emit(json_out, "project", body, || {
                println!("{} {reg_id}", if changed { "accepted" } else { "already accepted" })
            })
        }
        ProjectCommand::Show { dir } => {
            let session = load_session(dir)?;
            let body = serde_json::to_value(&session)?;
            emit(json_out, "project", body.clone(), || println!("{}", serde_json::to_string_pretty(&body).unwrap_or_default()))
        }
    }
}
