#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::scene::{microarray_placements, tile_cube, CubeSpec, Scene};
use flimreg_core::datamodel::{load_hypercube, load_plane, load_rgb, save_hypercube, save_plane, save_rgb, ProjectSession};
use flimreg_core::imaging::{mask_background, LifetimeRenderSpec, Weighting};
use flimreg_core::pipeline::{
    band_for_wavelength, false_histology, prepare_registration, register_tile, render_tile, tile_planes, TileOptions,
};
use flimreg_core::registration::{regress, RegressionParams, RegressionResult};
use flimreg_core::stitching::TilePlacement;
use flimreg_core::translation::TranslatorConfig;
use serde_json::Value;

fn flimreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flimreg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = flimreg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&ok(args).stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
    slide: PathBuf,
    reference: PathBuf,
    truths: Vec<TilePlacement>,
    manifests: Vec<PathBuf>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut r = common::rng(21);
    let scene = Scene::generate(300, 300, &mut r);
    let histology = scene.histology();
    let slide = dir.path().join("slide.png");
    save_rgb(&histology, &slide).unwrap();
    let reference = dir.path().join("reference.png");
    save_rgb(&mask_background(&histology).unwrap().0, &reference).unwrap();
    let truths = microarray_placements(&scene, 128, 32, 4.0, &mut r);
    let spec = CubeSpec { side: 48, bands: 10, time_bins: 24, ..CubeSpec::default() };
    let manifests =
        truths.iter().map(|t| save_hypercube(&tile_cube(&scene, t, &spec, &mut r), dir.path(), &t.tile_id).unwrap()).collect();
    Fixture { dir, slide, reference, truths, manifests }
}

#[test]
fn usage_and_runtime_exit_codes() {
    assert_eq!(flimreg(&["bogus"]).status.code(), Some(2));
    assert_eq!(flimreg(&["probe", "--project", "x", "--x", "1"]).status.code(), Some(2));
    assert_eq!(flimreg(&["register", "--moving", "a.png"]).status.code(), Some(2));
    assert_eq!(flimreg(&["stitch", "--project", "p", "--out", "o.png", "--weighting", "loud"]).status.code(), Some(2));
    let missing = flimreg(&["mask-bg", "--input", "/nonexistent.png", "--out", "/tmp/x.png"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    assert_eq!(flimreg(&["--version"]).status.code(), Some(0));
}

#[test]
fn stage_commands_match_engine_calls() {
    let fx = fixture();
    let d = fx.dir.path();
    let out = d.join("planes");
    let v = json(&["reconstruct", "--cube", s(&fx.manifests[0]), "--wavelength", "540", "--out", s(&out), "--json"]);
    assert_eq!(v["schema"], "flimreg.reconstruct/v1");
    let cube = load_hypercube(&fx.manifests[0]).unwrap();
    let band = band_for_wavelength(&cube, 540.0);
    let direct = tile_planes(&cube, band, &TileOptions { filter: false, ..TileOptions::default() }, None).unwrap();
    let ip = PathBuf::from(v["planes"][0]["intensity"].as_str().unwrap());
    let lp = PathBuf::from(v["planes"][0]["lifetime"].as_str().unwrap());
    assert_eq!(load_plane(&ip).unwrap(), direct.intensity);
    assert_eq!(load_plane(&lp).unwrap(), direct.lifetime);

    let v = json(&["reconstruct", "--cube", s(&fx.manifests[0]), "--all-bands", "--filter", "--out", s(&out), "--json"]);
    let planes = v["planes"].as_array().unwrap();
    assert_eq!(planes.len(), 10);
    let filtered = tile_planes(&cube, 7, &TileOptions::default(), None).unwrap();
    assert_eq!(load_plane(Path::new(planes[7]["lifetime"].as_str().unwrap())).unwrap(), filtered.lifetime);
    assert!(planes[7]["filter"]["threshold"].as_f64().unwrap() > 0.0);

    let masked = d.join("masked.png");
    ok(&["mask-bg", "--input", s(&fx.slide), "--out", s(&masked)]);
    assert_eq!(load_rgb(&masked).unwrap(), mask_background(&load_rgb(&fx.slide).unwrap()).unwrap().0);

    let render = d.join("render.png");
    ok(&["render", "--lifetime", s(&lp), "--intensity", s(&ip), "--out", s(&render)]);
    let spec = LifetimeRenderSpec { weighting: Weighting::Intensity, ..LifetimeRenderSpec::default() };
    let expected = render_tile(&direct, &spec).unwrap();
    assert_eq!(load_rgb(&render).unwrap(), expected);

    let fh = d.join("fh.png");
    let translator = format!("baseline:{}", fx.reference.display());
    ok(&["translate", "--input", s(&render), "--intensity", s(&ip), "--translator", &translator, "--out", s(&fh)]);
    let cfg = TranslatorConfig::Baseline { reference: fx.reference.clone() };
    assert_eq!(load_rgb(&fh).unwrap(), false_histology(&expected, &direct.intensity, &cfg, "render").unwrap());
}

#[test]
fn direct_register_defaults_and_golden() {
    let dir = tempfile::tempdir().unwrap();
    let dim = 256;
    let tex = common::blob_texture(dim, 40, (8.0, 30.0), 3);
    let g = common::random_corner_homography(dim, 8.0, &mut common::rng(4));
    let warped = common::reference_warp(&tex, dim, &g);
    let (moving, target) = (dir.path().join("m.png"), dir.path().join("t.png"));
    save_rgb(&common::gray_rgb(&tex, dim), &moving).unwrap();
    save_rgb(&common::gray_rgb(&warped, dim), &target).unwrap();
    let out = dir.path().join("r.json");
    let warped_png = dir.path().join("w.png");
    let v = json(&[
        "register", "--moving", s(&moving), "--target", s(&target), "--out", s(&out), "--warped", s(&warped_png), "--json",
    ]);
    assert_eq!(v["schema"], "flimreg.register/v1");
    assert_eq!(v["params"]["epochs"], 200);
    assert_eq!(v["params"]["seed"], 0);
    assert_eq!(v["loss_trace"].as_array().unwrap().len(), 200);
    let file: RegressionResult = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let direct = regress(&load_rgb(&moving).unwrap(), &load_rgb(&target).unwrap(), &RegressionParams::default(), &()).unwrap();
    assert_eq!(file, direct);
    assert_eq!(load_rgb(&warped_png).unwrap().dimensions(), (256, 256));
}

#[test]
fn project_workflow() {
    let fx = fixture();
    let proj = fx.dir.path().join("proj");
    ok(&["project", "init", "--dir", s(&proj), "--wsi", s(&fx.slide)]);
    assert_eq!(flimreg(&["project", "init", "--dir", s(&proj)]).status.code(), Some(1));
    for (t, m) in fx.truths.iter().zip(&fx.manifests) {
        ok(&["project", "add-tile", "--dir", s(&proj), "--id", &t.tile_id, "--manifest", s(m)]);
    }
    let translator = format!("baseline:{}", fx.reference.display());
    let p = fx.truths[0].patch;
    let patch = format!("{},{},{},{}", p.x, p.y, p.w, p.h);
    let result = fx.dir.path().join("result_t0.json");
    ok(&[
        "register", "--project", s(&proj), "--tile", "t0", "--patch", &patch, "--translator", &translator, "--out",
        s(&result), "--epochs", "60",
    ]);
    let cube = load_hypercube(&fx.manifests[0]).unwrap();
    let cfg = TranslatorConfig::Baseline { reference: fx.reference.clone() };
    let slide = load_rgb(&fx.slide).unwrap();
    let band = band_for_wavelength(&cube, 527.0);
    let inputs = prepare_registration(&cube, band, &TileOptions::default(), &cfg, "t0", &slide, &p).unwrap();
    let params = RegressionParams { epochs: 60, ..RegressionParams::default() };
    let direct = register_tile(&inputs, &params, &(), "t0", &p).unwrap();
    let file: RegressionResult = serde_json::from_slice(&std::fs::read(&result).unwrap()).unwrap();
    assert_eq!(file, direct);

    let first = json(&["project", "accept", "--dir", s(&proj), "--result", s(&result), "--json"]);
    let second = json(&["project", "accept", "--dir", s(&proj), "--result", s(&result), "--json"]);
    assert_eq!((first["changed"].as_bool(), second["changed"].as_bool()), (Some(true), Some(false)));
    assert_eq!(first["registration_id"], second["registration_id"]);
    let session = ProjectSession::load(&proj.join("project.json")).unwrap();
    assert_eq!(session.placements.len(), 1);

    let mosaic = fx.dir.path().join("mosaic.png");
    let v = json(&["stitch", "--project", s(&proj), "--out", s(&mosaic), "--blend-alpha", "0.7", "--json"]);
    assert_eq!(v["schema"], "flimreg.stitch/v1");
    assert!(v["covered_pixels"].as_u64().unwrap() > 0);
    assert_eq!(load_rgb(&mosaic).unwrap().dimensions(), (300, 300));
    assert!(Path::new(v["sidecar"].as_str().unwrap()).is_file());

    let (x, y) = (format!("{}", p.x + 64), format!("{}", p.y + 64));
    let v = json(&["probe", "--project", s(&proj), "--x", &x, "--y", &y, "--json"]);
    assert_eq!(v["window"], 5);
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    let csv = String::from_utf8(ok(&["probe", "--project", s(&proj), "--x", &x, "--y", &y]).stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("wavelength_nm,lifetime_ns"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn plane_files_round_trip_through_render() {
    let dir = tempfile::tempdir().unwrap();
    let plane = flimreg_core::datamodel::ScalarPlane::new(
        4,
        1,
        flimreg_core::datamodel::PlaneKind::LifetimeNs,
        vec![0.5, 1.0, 2.0, 3.5],
    )
    .unwrap();
    let path = dir.path().join("l.plane");
    save_plane(&plane, &path).unwrap();
    let out = dir.path().join("l.png");
    ok(&["render", "--lifetime", s(&path), "--weighting", "none", "--colormap", "gray", "--range", "1,3", "--out", s(&out)]);
    let img = load_rgb(&out).unwrap();
    let levels: Vec<u8> = img.pixels().map(|p| p.0[0]).collect();
    assert_eq!(levels[0], levels[1]);
    assert!(levels[1] < levels[2] && levels[2] < levels[3]);
}
