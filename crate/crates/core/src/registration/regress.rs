//! Gradient-descent homography regression.

use serde::{Deserialize, Serialize};

use crate::datamodel::RgbImage;
use crate::error::{Error, Result};
use crate::imaging::resize_channels;
use crate::stitching::PatchRect;

use super::homography::Homography;
use super::loss::loss_and_gradient;
use super::metrics::{compute_metrics, Metrics};
use super::raster::{ColorMode, Raster};
use super::warp::warp_raster;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Gd,
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" | "sgd" => Ok(Optimizer::Gd),
            "adam" => Ok(Optimizer::Adam),
            _ => Err(Error::param("optimizer", format!("unknown optimizer `{s}`"))),
        }
    }
}

impl std::str::FromStr for ColorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray" | "grey" => Ok(ColorMode::Gray),
            "rgb" => Ok(ColorMode::Rgb),
            _ => Err(Error::param("color_mode", format!("unknown color mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressionParams {
    pub epochs: usize,
    pub lr: f64,
    pub decay_epoch: usize,
    pub decay_factor: f64,
    pub window: usize,
    pub regression_dim: usize,
    pub color_mode: ColorMode,
    pub optimizer: Optimizer,
    /// Recorded for provenance; the descent itself is deterministic.
    pub seed: u64,
}

impl Default for RegressionParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.01,
            decay_epoch: 100,
            decay_factor: 0.1,
            window: 200,
            regression_dim: 256,
            color_mode: ColorMode::Gray,
            optimizer: Optimizer::Gd,
            seed: 0,
        }
    }
}

impl RegressionParams {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::param("lr", "must be a positive number"));
        }
        if !(self.decay_factor.is_finite() && self.decay_factor > 0.0) {
            return Err(Error::param("decay_factor", "must be a positive number"));
        }
        if self.regression_dim < 2 {
            return Err(Error::param("regression_dim", "must be at least 2"));
        }
        if self.window == 0 || self.window > self.regression_dim {
            return Err(Error::param(
                "window",
                format!("must be in 1..={} (the regression dimension)", self.regression_dim),
            ));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch >= self.decay_epoch {
            self.lr * self.decay_factor
        } else {
            self.lr
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochProgress {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
    /// Current target->moving estimate.
    pub homography: Homography,
}

pub trait ProgressSink: Sync {
    fn epoch(&self, progress: &EpochProgress);
}

impl ProgressSink for () {
    fn epoch(&self, _: &EpochProgress) {}
}

impl<F: Fn(&EpochProgress) + Sync> ProgressSink for F {
    fn epoch(&self, progress: &EpochProgress) {
        self(progress)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchRect>,
    /// Moving -> target, normalized coordinates of the regression frame.
    pub homography: Homography,
    /// Same map between `regression_dim`-pixel frames.
    pub homography_pixel: Homography,
    pub params: RegressionParams,
    pub loss_trace: Vec<f64>,
    pub best_epoch: usize,
    pub final_loss: f64,
    pub metrics: Option<Metrics>,
}

fn to_square(r: &Raster, dim: usize) -> Raster {
    let data = resize_channels(r.data(), r.dims(), r.channels(), (dim, dim));
    Raster::new(dim, dim, r.channels(), data).expect("resize keeps shape")
}

/// Registers `moving` onto `target` (both resized to the regression frame).
pub fn regress(
    moving: &RgbImage,
    target: &RgbImage,
    params: &RegressionParams,
    sink: &dyn ProgressSink,
) -> Result<RegressionResult> {
    let m = Raster::from_rgb(moving, params.color_mode);
    let t = Raster::from_rgb(target, params.color_mode);
    regress_rasters(&m, &t, params, sink)
}

pub fn regress_rasters(
    moving: &Raster,
    target: &Raster,
    params: &RegressionParams,
    sink: &dyn ProgressSink,
) -> Result<RegressionResult> {
    params.validate()?;
    if moving.channels() != target.channels() {
        return Err(Error::DimensionMismatch("moving and target channel counts differ".into()));
    }
    let dim = params.regression_dim;
    let mov = to_square(moving, dim);
    let tgt = to_square(target, dim);

    let mut p = Homography::IDENTITY.params();
    let mut m1 = [0.0f64; 8];
    let mut m2 = [0.0f64; 8];
    let mut trace = Vec::with_capacity(params.epochs);
    let mut best: Option<(usize, f64, [f64; 8])> = None;

    for epoch in 0..params.epochs {
        let g = Homography::from_params(p);
        let (loss, grad) = loss_and_gradient(&g, &mov, &tgt, params.window)?;
        if !loss.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.push(loss);
        if best.is_none_or(|(_, l, _)| loss < l) && g.ensure_invertible().is_ok() {
            best = Some((epoch, loss, p));
        }
        let lr = params.lr_at(epoch);
        sink.epoch(&EpochProgress { epoch, loss, lr, homography: g });
        match params.optimizer {
            Optimizer::Gd => {
                for k in 0..8 {
                    p[k] -= lr * grad[k];
                }
            }
            Optimizer::Adam => {
                let t = (epoch + 1) as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for k in 0..8 {
                    m1[k] = ADAM_BETA1 * m1[k] + (1.0 - ADAM_BETA1) * grad[k];
                    m2[k] = ADAM_BETA2 * m2[k] + (1.0 - ADAM_BETA2) * grad[k] * grad[k];
                    p[k] -= lr * (m1[k] / c1) / ((m2[k] / c2).sqrt() + ADAM_EPS);
                }
            }
        }
    }

    let (best_epoch, final_loss, best_p) = best.ok_or(Error::SingularHomography(0.0))?;
    let g = Homography::from_params(best_p);
    let h = g.inverse()?;
    let metrics = {
        let warped = warp_raster(&mov.to_gray(), &g, (dim, dim))?;
        compute_metrics(&warped, &tgt.to_gray()).ok()
    };
    Ok(RegressionResult {
        tile_id: None,
        patch: None,
        homography: h,
        homography_pixel: h.to_pixel_frame((dim, dim), (dim, dim))?,
        params: params.clone(),
        loss_trace: trace,
        best_epoch,
        final_loss,
        metrics,
    })
}
