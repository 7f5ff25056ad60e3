#![allow(dead_code)]

use flimreg_core::datamodel::RgbImage;
use flimreg_core::registration::{normalize_frame, Homography, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random texture: a sum of Gaussian blobs over a mid-gray base.
pub fn blob_texture(dim: usize, blobs: usize, sigma: (f64, f64), seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let specs: Vec<(f64, f64, f64, f64)> = (0..blobs)
        .map(|_| {
            (
                r.random_range(0.0..dim as f64),
                r.random_range(0.0..dim as f64),
                r.random_range(sigma.0..sigma.1),
                r.random_range(-0.35..0.35),
            )
        })
        .collect();
    let mut out = vec![0.5; dim * dim];
    for y in 0..dim {
        for x in 0..dim {
            let mut v = 0.5;
            for &(cx, cy, s, a) in &specs {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                v += a * (-d2 / (2.0 * s * s)).exp();
            }
            out[y * dim + x] = v.clamp(0.02, 1.0);
        }
    }
    out
}

pub fn gray_rgb(values: &[f64], dim: usize) -> RgbImage {
    RgbImage::from_fn(dim as u32, dim as u32, |x, y| {
        let g = (values[y as usize * dim + x as usize] * 255.0).round() as u8;
        image::Rgb([g, g, g])
    })
}

pub fn raster(values: &[f64], dim: usize) -> Raster {
    Raster::new(dim, dim, 1, values.iter().map(|&v| v as f32).collect()).unwrap()
}

pub fn corners(dim: usize) -> [(f64, f64); 4] {
    let e = (dim - 1) as f64;
    [(0.0, 0.0), (e, 0.0), (0.0, e), (e, e)]
}

/// Pixel-frame homography taking each image corner `c` to `c + d` with
/// `d` uniform in `[-max_px, max_px]²`, returned in normalized coordinates.
pub fn random_corner_homography(dim: usize, max_px: f64, r: &mut impl Rng) -> Homography {
    let src = corners(dim);
    let dst = src.map(|(x, y)| (x + r.random_range(-max_px..=max_px), y + r.random_range(-max_px..=max_px)));
    let pix = Homography::from_point_pairs(&src, &dst).unwrap();
    let n = normalize_frame((dim, dim));
    n.compose(&pix).unwrap().compose(&n.inverse().unwrap()).unwrap()
}

/// Mean distance between where two normalized homographies send the image
/// corners, in pixels of a `dim`-wide frame.
pub fn mean_corner_error(a: &Homography, b: &Homography, dim: usize) -> f64 {
    let pa = a.to_pixel_frame((dim, dim), (dim, dim)).unwrap();
    let pb = b.to_pixel_frame((dim, dim), (dim, dim)).unwrap();
    corners(dim)
        .iter()
        .map(|&(x, y)| {
            let (ax, ay) = pa.apply(x, y).unwrap();
            let (bx, by) = pb.apply(x, y).unwrap();
            ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
        })
        .sum::<f64>()
        / 4.0
}

/// Independent reference warp: `out(q) = img(G q)` with zero-padded bilinear
/// sampling written directly from the definition.
pub fn reference_warp(img: &[f64], dim: usize, g: &Homography) -> Vec<f64> {
    let m = g.entries();
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= dim as i64 || y >= dim as i64 {
            0.0
        } else {
            img[y as usize * dim + x as usize]
        }
    };
    let s = (dim - 1) as f64 / 2.0;
    let mut out = vec![0.0; dim * dim];
    for j in 0..dim {
        for i in 0..dim {
            let (xn, yn) = (i as f64 / s - 1.0, j as f64 / s - 1.0);
            let w = m[6] * xn + m[7] * yn + m[8];
            let u = ((m[0] * xn + m[1] * yn + m[2]) / w + 1.0) * s;
            let v = ((m[3] * xn + m[4] * yn + m[5]) / w + 1.0) * s;
            let (x0, y0) = (u.floor(), v.floor());
            let (fx, fy) = (u - x0, v - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            out[j * dim + i] = at(x0, y0) * (1.0 - fx) * (1.0 - fy)
                + at(x0 + 1, y0) * fx * (1.0 - fy)
                + at(x0, y0 + 1) * (1.0 - fx) * fy
                + at(x0 + 1, y0 + 1) * fx * fy;
        }
    }
    out
}

/// Kink-free gradient-check configuration: each moving channel is a random
/// bilinear field in `[0.55, 1]` (so bilinear interpolation is exact) and the
/// target is noise in `[0, 0.45]` (so the L1 residual never changes sign).
pub fn smooth_gradient_pair(dim: usize, channels: usize, r: &mut impl Rng) -> (Raster, Raster) {
    let mut mov = vec![0f32; dim * dim * channels];
    let mut tgt = vec![0f32; dim * dim * channels];
    for c in 0..channels {
        let k: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        for y in 0..dim {
            for x in 0..dim {
                let (xs, ys) = (x as f64 / (dim - 1) as f64, y as f64 / (dim - 1) as f64);
                let f = 0.5 + (k[0] * xs + k[1] * ys + k[2] * xs * ys + k[3]) / 8.0;
                mov[(y * dim + x) * channels + c] = (0.55 + 0.45 * f) as f32;
                tgt[(y * dim + x) * channels + c] = r.random_range(0.0..0.45);
            }
        }
    }
    (Raster::new(dim, dim, channels, mov).unwrap(), Raster::new(dim, dim, channels, tgt).unwrap())
}

/// Central differences of the loss in each of the 8 free entries.
pub fn finite_difference_gradient(
    g: &Homography,
    moving: &Raster,
    target: &Raster,
    window: usize,
    eps: f64,
) -> [f64; 8] {
    let p = g.params();
    std::array::from_fn(|k| {
        let mut hi = p;
        let mut lo = p;
        hi[k] += eps;
        lo[k] -= eps;
        let lh = flimreg_core::registration::loss(&Homography::from_params(hi), moving, target, window).unwrap();
        let ll = flimreg_core::registration::loss(&Homography::from_params(lo), moving, target, window).unwrap();
        (lh - ll) / (2.0 * eps)
    })
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}
pub mod oracles;
pub mod scene;
