//! Default pool vs. one worker on the three hot paths. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flimreg_core::datamodel::{CubeAxes, Hypercube, PlaneKind, ScalarPlane};
use flimreg_core::par::Workers;
use flimreg_core::reconstruction::reconstruct_planes;
use flimreg_core::registration::{loss_and_gradient, Homography, Raster};
use flimreg_core::stitching::{stitch, PatchRect, StitchOptions, TileImage, TilePlacement};

fn configs() -> [(&'static str, Workers); 2] {
    [("pool", Workers::all()), ("single", Workers::fixed(1))]
}

fn decay_cube(side: usize, t_bins: usize) -> Hypercube {
    let axes = CubeAxes { time_bin_ps: 250.0, ..CubeAxes::default() };
    let mut counts = Vec::with_capacity(side * side * t_bins);
    for p in 0..side * side {
        let tau = 1.0 + (p % 5) as f64 * 0.5;
        for t in 0..t_bins {
            counts.push((400.0 * (-(t as f64) * 0.25 / tau).exp() + 2.0) as f32);
        }
    }
    Hypercube::from_f32([side, side, 1, t_bins], axes, counts).unwrap()
}

fn texture(dim: usize, phase: f64) -> Raster {
    let data = (0..dim * dim)
        .map(|i| {
            let (x, y) = ((i % dim) as f64, (i / dim) as f64);
            (0.5 + 0.3 * (x * 0.07 + phase).sin() * (y * 0.05).cos()) as f32
        })
        .collect();
    Raster::new(dim, dim, 1, data).unwrap()
}

fn bench_reconstruct(c: &mut Criterion) {
    let cube = decay_cube(64, 40);
    let mut g = c.benchmark_group("reconstruct_64x64");
    for (name, workers) in configs() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| workers.install(|| reconstruct_planes(&cube, 0).unwrap()))
        });
    }
    g.finish();
}

fn bench_loss(c: &mut Criterion) {
    let moving = texture(256, 0.0);
    let target = texture(256, 0.3);
    let h = Homography::translation(0.01, -0.02);
    let mut g = c.benchmark_group("loss_gradient_256");
    for (name, workers) in configs() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| workers.install(|| loss_and_gradient(&h, &moving, &target, 200).unwrap()))
        });
    }
    g.finish();
}

fn bench_stitch(c: &mut Criterion) {
    let tiles: BTreeMap<String, TileImage> = (0..4)
        .map(|i| {
            let vals = (0..128 * 128).map(|k| 1.0 + ((k + i * 7) % 200) as f32 / 100.0).collect();
            (format!("t{i}"), TileImage::Plane(ScalarPlane::new(128, 128, PlaneKind::LifetimeNs, vals).unwrap()))
        })
        .collect();
    let placements: Vec<TilePlacement> = (0..4u32)
        .map(|i| TilePlacement {
            tile_id: format!("t{i}"),
            patch: PatchRect::new((i % 2) * 200, (i / 2) * 200, 256, 256),
            homography: Homography::translation(0.02, 0.01),
            regression_dim: 256,
        })
        .collect();
    let opts = StitchOptions::new((456, 456));
    let mut g = c.benchmark_group("stitch_4_tiles");
    for (name, workers) in configs() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| workers.install(|| stitch(&placements, &tiles, &opts, None, None).unwrap()))
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_reconstruct, bench_loss, bench_stitch
}
criterion_main!(benches);
