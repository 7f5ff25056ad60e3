//! Partial photometric L1 loss and its analytic gradient.

use crate::error::{Error, Result};
use crate::par;

use super::homography::Homography;
use super::raster::Raster;
use super::warp::{sample, sample_with_gradient, to_normalized, to_pixel};

/// Loss window: a centered `window × window` square of the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossWindow {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl LossWindow {
    pub fn centered(dims: (usize, usize), window: usize) -> Result<Self> {
        let (w, h) = dims;
        if window == 0 || window > w || window > h {
            return Err(Error::param("window", format!("window {window} does not fit a {w}x{h} image")));
        }
        Ok(Self { x0: (w - window) / 2, y0: (h - window) / 2, w: window, h: window })
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

/// Mean absolute difference over the window and all channels.
pub fn partial_l1(warped: &Raster, target: &Raster, window: usize) -> Result<f64> {
    if warped.dims() != target.dims() || warped.channels() != target.channels() {
        return Err(Error::DimensionMismatch("warped and target rasters differ in shape".into()));
    }
    let win = LossWindow::centered(target.dims(), window)?;
    let ch = target.channels();
    let rows = par::map_indexed(win.h, |r| {
        let y = win.y0 + r;
        let mut s = 0.0f64;
        for x in win.x0..win.x0 + win.w {
            for c in 0..ch {
                s += (f64::from(warped.at(x, y, c)) - f64::from(target.at(x, y, c))).abs();
            }
        }
        s
    });
    Ok(rows.iter().sum::<f64>() / (win.area() * ch) as f64)
}

/// Loss of `moving` warped by the target->moving map `g`, evaluated directly
/// without materialising the warped image.
pub fn loss(g: &Homography, moving: &Raster, target: &Raster, window: usize) -> Result<f64> {
    Ok(evaluate(g, moving, target, window, false)?.0)
}

/// Loss and gradient with respect to the 8 free entries of `g`.
pub fn loss_and_gradient(
    g: &Homography,
    moving: &Raster,
    target: &Raster,
    window: usize,
) -> Result<(f64, [f64; 8])> {
    evaluate(g, moving, target, window, true)
}

fn evaluate(
    g: &Homography,
    moving: &Raster,
    target: &Raster,
    window: usize,
    with_grad: bool,
) -> Result<(f64, [f64; 8])> {
    if moving.channels() != target.channels() {
        return Err(Error::DimensionMismatch("moving and target channel counts differ".into()));
    }
    let win = LossWindow::centered(target.dims(), window)?;
    let (tw, th) = target.dims();
    let (mw, mh) = moving.dims();
    let ch = moving.channels();
    let m = *g.entries();
    let du_dxn = (mw.max(2) - 1) as f64 * 0.5;
    let dv_dyn = (mh.max(2) - 1) as f64 * 0.5;

    let rows = par::map_indexed(win.h, |r| {
        let y = win.y0 + r;
        let yq = to_normalized(y as f64, th);
        let mut acc = [0.0f64; 9];
        for x in win.x0..win.x0 + win.w {
            let xq = to_normalized(x as f64, tw);
            let a = m[0] * xq + m[1] * yq + m[2];
            let b = m[3] * xq + m[4] * yq + m[5];
            let w = m[6] * xq + m[7] * yq + m[8];
            if w.abs() < 1e-12 {
                for c in 0..ch {
                    acc[8] += f64::from(target.at(x, y, c)).abs();
                }
                continue;
            }
            let xn = a / w;
            let yn = b / w;
            let u = to_pixel(xn, mw);
            let v = to_pixel(yn, mh);
            if !with_grad {
                for c in 0..ch {
                    acc[8] += (sample(moving, u, v, c) - f64::from(target.at(x, y, c))).abs();
                }
                continue;
            }
            let (mut gu, mut gv) = (0.0, 0.0);
            for c in 0..ch {
                let (val, di_du, di_dv) = sample_with_gradient(moving, u, v, c);
                let res = val - f64::from(target.at(x, y, c));
                acc[8] += res.abs();
                let s = if res > 0.0 {
                    1.0
                } else if res < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                gu += s * di_du;
                gv += s * di_dv;
            }
            let gx = gu * du_dxn / w;
            let gy = gv * dv_dyn / w;
            let gw = -(gx * xn + gy * yn);
            acc[0] += gx * xq;
            acc[1] += gx * yq;
            acc[2] += gx;
            acc[3] += gy * xq;
            acc[4] += gy * yq;
            acc[5] += gy;
            acc[6] += gw * xq;
            acc[7] += gw * yq;
        }
        acc
    });

    let mut total = [0.0f64; 9];
    for row in &rows {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    let n = (win.area() * ch) as f64;
    let mut grad = [0.0; 8];
    for (gk, t) in grad.iter_mut().zip(&total) {
        *gk = t / n;
    }
    Ok((total[8] / n, grad))
}
