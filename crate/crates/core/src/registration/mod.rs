//! Homography regression between a false-colour tile and a slide patch.

mod homography;
mod loss;
mod metrics;
mod raster;
mod regress;
mod warp;

pub use homography::{normalize_frame, Homography};
pub use loss::{loss, loss_and_gradient, partial_l1, LossWindow};
pub use metrics::{compute_metrics, mse, ncc, nmi, Metrics, NMI_BINS};
pub use raster::{ColorMode, Raster};
pub use regress::{
    regress, regress_rasters, EpochProgress, Optimizer, ProgressSink, RegressionParams, RegressionResult,
};
pub use warp::{sample, sample_with_gradient, to_normalized, to_pixel, warp_plane, warp_raster, warp_rgb};
