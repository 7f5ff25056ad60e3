//! A synthetic tissue microarray: an H&E-like slide and FLIM hypercubes of
//! the same scene seen through slightly misplaced tiles.

use flimreg_core::datamodel::{CubeAxes, Hypercube, RgbImage};
use flimreg_core::stitching::{tile_to_slide, PatchRect, TilePlacement};
use image::Rgb;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

pub const BACKGROUND: [u8; 3] = [244, 242, 246];
pub const STROMA: [u8; 3] = [220, 120, 180];
pub const NUCLEUS: [u8; 3] = [80, 40, 130];

/// Lifetime over the left part of the slide.
pub const CONSTANT_TAU: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Background,
    Stroma,
    Nucleus,
}

pub struct Scene {
    pub width: u32,
    pub height: u32,
    /// Left of this x the lifetime is [`CONSTANT_TAU`].
    pub split_x: f64,
    waves: Vec<(f64, f64, f64, f64)>,
    nuclei: Vec<(f64, f64, f64)>,
}

impl Scene {
    pub fn generate(width: u32, height: u32, r: &mut impl Rng) -> Self {
        let waves = (0..12)
            .map(|_| {
                let theta: f64 = r.random_range(0.0..std::f64::consts::PI);
                let omega = std::f64::consts::TAU / r.random_range(50.0..120.0);
                (omega * theta.cos(), omega * theta.sin(), r.random_range(0.0..std::f64::consts::TAU), 1.0)
            })
            .collect();
        let count = (width * height) as usize / 1200;
        let nuclei = (0..count)
            .map(|_| {
                (r.random_range(0.0..f64::from(width)), r.random_range(0.0..f64::from(height)), r.random_range(5.0..8.0))
            })
            .collect();
        Self { width, height, split_x: f64::from(width) / 2.0, waves, nuclei }
    }

    pub fn class_at(&self, x: f64, y: f64) -> Class {
        let margin = 20.0;
        if x < margin || y < margin || x > f64::from(self.width) - margin || y > f64::from(self.height) - margin {
            return Class::Background;
        }
        let field: f64 = self.waves.iter().map(|&(kx, ky, phase, a)| a * (kx * x + ky * y + phase).sin()).sum();
        if field < 0.0 {
            return Class::Background;
        }
        if self.nuclei.iter().any(|&(cx, cy, rad)| (x - cx).powi(2) + (y - cy).powi(2) <= rad * rad) {
            Class::Nucleus
        } else {
            Class::Stroma
        }
    }

    pub fn tau_at(&self, x: f64, y: f64) -> f64 {
        if x < self.split_x {
            CONSTANT_TAU
        } else {
            1.4 + 1.2 * y / f64::from(self.height)
        }
    }

    pub fn histology(&self) -> RgbImage {
        RgbImage::from_fn(self.width, self.height, |x, y| {
            Rgb(match self.class_at(f64::from(x), f64::from(y)) {
                Class::Background => BACKGROUND,
                Class::Stroma => STROMA,
                Class::Nucleus => NUCLEUS,
            })
        })
    }

    /// A point in the constant-lifetime half whose `reach`-neighbourhood is
    /// all tissue and which `covered` accepts.
    pub fn constant_tau_point(&self, reach: i32, covered: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
        let (cx, cy) = (self.split_x - 40.0, f64::from(self.height) / 2.0);
        let mut candidates: Vec<(f64, f64)> = Vec::new();
        for y in (30..self.height as i32 - 30).step_by(3) {
            for x in (30..self.split_x as i32 - 30).step_by(3) {
                candidates.push((f64::from(x), f64::from(y)));
            }
        }
        candidates.sort_by(|a, b| {
            let da = (a.0 - cx).powi(2) + (a.1 - cy).powi(2);
            let db = (b.0 - cx).powi(2) + (b.1 - cy).powi(2);
            da.total_cmp(&db)
        });
        candidates.into_iter().find(|&(x, y)| {
            covered(x, y)
                && (-reach..=reach).all(|dy| {
                    (-reach..=reach).all(|dx| self.class_at(x + f64::from(dx), y + f64::from(dy)) != Class::Background)
                })
        })
    }
}

pub struct CubeSpec {
    pub side: usize,
    pub bands: usize,
    pub time_bins: usize,
    pub axes: CubeAxes,
    /// Expected peak counts per band for a nucleus pixel.
    pub peak: f64,
}

impl Default for CubeSpec {
    fn default() -> Self {
        Self {
            side: 128,
            bands: 24,
            time_bins: 32,
            axes: CubeAxes { wavelength_start_nm: 500.0, wavelength_step_nm: 8.0, time_bin_ps: 250.0 },
            peak: 500.0,
        }
    }
}

fn spectrum(nm: f64) -> f64 {
    0.35 + 0.65 * (-(nm - 570.0).powi(2) / (2.0 * 60.0f64.powi(2))).exp()
}

/// Poisson-sampled FLIM cube of the scene as seen by a tile at `truth`.
pub fn tile_cube(scene: &Scene, truth: &TilePlacement, spec: &CubeSpec, r: &mut impl Rng) -> Hypercube {
    let map = tile_to_slide(truth, (spec.side, spec.side)).unwrap();
    let bin_ns = spec.axes.time_bin_ps / 1000.0;
    let sub = 3;
    let mut counts = Vec::with_capacity(spec.side * spec.side * spec.bands * spec.time_bins);
    let mut decay = vec![0.0f64; spec.time_bins];
    for x in 0..spec.side {
        for y in 0..spec.side {
            decay.iter_mut().for_each(|d| *d = 0.0);
            for sy in 0..sub {
                for sx in 0..sub {
                    let u = x as f64 - 0.5 + (sx as f64 + 0.5) / sub as f64;
                    let v = y as f64 - 0.5 + (sy as f64 + 0.5) / sub as f64;
                    let (px, py) = map.apply(u, v).unwrap();
                    let amp = match scene.class_at(px, py) {
                        Class::Background => continue,
                        Class::Stroma => 0.45,
                        Class::Nucleus => 1.0,
                    };
                    let tau = scene.tau_at(px, py);
                    for (t, d) in decay.iter_mut().enumerate() {
                        *d += amp * (-(t as f64) * bin_ns / tau).exp() / (sub * sub) as f64;
                    }
                }
            }
            for s in 0..spec.bands {
                let scale = spec.peak * spectrum(spec.axes.wavelength_start_nm + s as f64 * spec.axes.wavelength_step_nm);
                for &d in &decay {
                    let lambda = d * scale;
                    let c = if lambda > 0.0 { Poisson::new(lambda).unwrap().sample(r) } else { 0.0 };
                    counts.push(c.min(f64::from(u16::MAX)) as u16);
                }
            }
        }
    }
    Hypercube::from_u16([spec.side, spec.side, spec.bands, spec.time_bins], spec.axes, counts).unwrap()
}

/// Four overlapping patches in a 2×2 grid; each true placement perturbs its
/// patch by up to `max_px` per corner in the regression frame.
pub fn microarray_placements(scene: &Scene, patch: u32, overlap: u32, max_px: f64, r: &mut impl Rng) -> Vec<TilePlacement> {
    let step = patch - overlap;
    let x0 = (scene.width - (patch + step)) / 2;
    let y0 = (scene.height - (patch + step)) / 2;
    (0..4u32)
        .map(|i| TilePlacement {
            tile_id: format!("t{i}"),
            patch: PatchRect::new(x0 + (i % 2) * step, y0 + (i / 2) * step, patch, patch),
            homography: super::random_corner_homography(256, max_px, r),
            regression_dim: 256,
        })
        .collect()
}
