//! Differentiable projective warping with bilinear, zero-padded sampling.

use crate::datamodel::{RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::par;

use super::homography::Homography;
use super::raster::{ColorMode, Raster};

/// Sample positions closer than this to a lattice point snap onto it, so
/// identity and integer-shift warps reproduce pixels exactly.
const SNAP: f64 = 1e-9;

/// Maps pixel index `i` of a `len`-pixel axis to `[-1, 1]`.
#[inline]
pub fn to_normalized(i: f64, len: usize) -> f64 {
    if len < 2 {
        0.0
    } else {
        2.0 * i / (len - 1) as f64 - 1.0
    }
}

#[inline]
pub fn to_pixel(n: f64, len: usize) -> f64 {
    (n + 1.0) * (len.max(2) - 1) as f64 * 0.5
}

#[inline]
fn snap(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() < SNAP {
        r
    } else {
        u
    }
}

/// Bilinear sample of channel `c` at pixel coords `(u, v)` plus its partial
/// derivatives `(d/du, d/dv)`; right-continuous at lattice lines.
#[inline]
pub fn sample_with_gradient(img: &Raster, u: f64, v: f64, c: usize) -> (f64, f64, f64) {
    let (u, v) = (snap(u), snap(v));
    let x0f = u.floor();
    let y0f = v.floor();
    if x0f < -1.0 || y0f < -1.0 || x0f >= img.width() as f64 || y0f >= img.height() as f64 {
        return (0.0, 0.0, 0.0);
    }
    let (x0, y0) = (x0f as isize, y0f as isize);
    let fx = u - x0f;
    let fy = v - y0f;
    let i00 = f64::from(img.at_padded(x0, y0, c));
    let i10 = f64::from(img.at_padded(x0 + 1, y0, c));
    let i01 = f64::from(img.at_padded(x0, y0 + 1, c));
    let i11 = f64::from(img.at_padded(x0 + 1, y0 + 1, c));
    let top = i00 + (i10 - i00) * fx;
    let bottom = i01 + (i11 - i01) * fx;
    let value = top + (bottom - top) * fy;
    let du = (1.0 - fy) * (i10 - i00) + fy * (i11 - i01);
    let dv = bottom - top;
    (value, du, dv)
}

#[inline]
pub fn sample(img: &Raster, u: f64, v: f64, c: usize) -> f64 {
    let (u, v) = (snap(u), snap(v));
    let x0f = u.floor();
    let y0f = v.floor();
    if x0f < -1.0 || y0f < -1.0 || x0f >= img.width() as f64 || y0f >= img.height() as f64 {
        return 0.0;
    }
    let (x0, y0) = (x0f as isize, y0f as isize);
    let fx = u - x0f;
    let fy = v - y0f;
    if fx == 0.0 && fy == 0.0 {
        return f64::from(img.at_padded(x0, y0, c));
    }
    let i00 = f64::from(img.at_padded(x0, y0, c));
    let i10 = f64::from(img.at_padded(x0 + 1, y0, c));
    let i01 = f64::from(img.at_padded(x0, y0 + 1, c));
    let i11 = f64::from(img.at_padded(x0 + 1, y0 + 1, c));
    let top = i00 + (i10 - i00) * fx;
    let bottom = i01 + (i11 - i01) * fx;
    top + (bottom - top) * fy
}

/// `out(q) = moving(G · q)` in normalized coordinates, zero outside `moving`.
pub fn warp_raster(moving: &Raster, g: &Homography, out_dims: (usize, usize)) -> Result<Raster> {
    g.ensure_invertible()?;
    let (ow, oh) = out_dims;
    if ow == 0 || oh == 0 {
        return Err(Error::param("out_dims", "must be positive"));
    }
    let ch = moving.channels();
    let (mw, mh) = moving.dims();
    let m = g.entries();
    let mut out = vec![0.0f32; ow * oh * ch];
    par::for_each_row_mut(&mut out, ow * ch, |y, row| {
        let yn = to_normalized(y as f64, oh);
        for x in 0..ow {
            let xn = to_normalized(x as f64, ow);
            let w = m[6] * xn + m[7] * yn + m[8];
            if w.abs() < 1e-12 {
                continue;
            }
            let u = to_pixel((m[0] * xn + m[1] * yn + m[2]) / w, mw);
            let v = to_pixel((m[3] * xn + m[4] * yn + m[5]) / w, mh);
            for c in 0..ch {
                row[x * ch + c] = sample(moving, u, v, c) as f32;
            }
        }
    });
    Raster::new(ow, oh, ch, out)
}

pub fn warp_rgb(moving: &RgbImage, g: &Homography, out_dims: (usize, usize)) -> Result<RgbImage> {
    let raster = Raster::from_rgb(moving, ColorMode::Rgb);
    Ok(warp_raster(&raster, g, out_dims)?.to_rgb())
}

pub fn warp_plane(moving: &ScalarPlane, g: &Homography, out_dims: (usize, usize)) -> Result<ScalarPlane> {
    let raster = Raster::from_plane(moving);
    let out = warp_raster(&raster, g, out_dims)?;
    let vals = out.data().iter().map(|&v| v.max(0.0)).collect();
    Ok(ScalarPlane::from_parts(out_dims.0, out_dims.1, moving.kind(), moving.wavelength_nm(), vals))
}
