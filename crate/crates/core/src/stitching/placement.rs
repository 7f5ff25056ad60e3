use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registration::{normalize_frame, Homography};

/// Axis-aligned rectangle in whole-slide pixels (top-left origin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PatchRect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn validate_within(&self, width: u32, height: u32) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::RectOutOfBounds(format!("{self} has zero area")));
        }
        let fits = u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height);
        if !fits {
            return Err(Error::RectOutOfBounds(format!("{self} exceeds {width}x{height}")));
        }
        Ok(())
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= f64::from(self.x)
            && py >= f64::from(self.y)
            && px < f64::from(self.x) + f64::from(self.w)
            && py < f64::from(self.y) + f64::from(self.h)
    }
}

impl std::fmt::Display for PatchRect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.w, self.h)
    }
}

impl std::str::FromStr for PatchRect {
    type Err = String;

    /// Parses `x,y,w,h`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [x, y, w, h] => Ok(PatchRect { x, y, w, h }),
            _ => Err(format!("expected x,y,w,h, got `{s}`")),
        }
    }
}

/// A registered tile: where its histology patch sits on the slide and how the
/// tile maps onto that patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilePlacement {
    pub tile_id: String,
    pub patch: PatchRect,
    /// Moving (tile) -> target (patch), normalized regression frame.
    pub homography: Homography,
    pub regression_dim: usize,
}

/// Pixel-frame transform from a tile resampled to `regression_dim`² into
/// whole-slide pixels.
///
/// Composition, applied right to left:
/// `translate(patch.x, patch.y) · scale(patch.w / D, patch.h / D) · to_pixel_D · H · to_normalized_D`.
pub fn compose_placement(p: &TilePlacement) -> Result<Homography> {
    p.homography.ensure_invertible()?;
    if p.regression_dim < 2 {
        return Err(Error::param("regression_dim", "must be at least 2"));
    }
    let d = p.regression_dim;
    let to_norm = normalize_frame((d, d));
    let to_pix = to_norm.inverse()?;
    let scale = Homography::scale(f64::from(p.patch.w) / d as f64, f64::from(p.patch.h) / d as f64);
    let shift = Homography::translation(f64::from(p.patch.x), f64::from(p.patch.y));
    shift.compose(&scale)?.compose(&to_pix)?.compose(&p.homography)?.compose(&to_norm)
}

/// Transform from a tile image of `tile_dims` (any resolution) into slide pixels.
pub fn tile_to_slide(p: &TilePlacement, tile_dims: (usize, usize)) -> Result<Homography> {
    let d = p.regression_dim as f64;
    let to_regression = Homography::scale(d / tile_dims.0 as f64, d / tile_dims.1 as f64);
    compose_placement(p)?.compose(&to_regression)
}
