use nalgebra::{Matrix3, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DET_EPS: f64 = 1e-9;

/// 3x3 projective transform, row-major, with `h[2][2]` pinned to 1.
///
/// Unless stated otherwise the matrix acts on normalized coordinates, where a
/// `D`-pixel axis spans `[-1, 1]` with pixel `0` at `-1` and pixel `D-1` at `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Homography([f64; 9]);

impl Homography {
    pub const IDENTITY: Homography = Homography([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    /// Normalizes by the last entry and checks invertibility.
    pub fn new(m: [f64; 9]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("homography has non-finite entries".into()));
        }
        if m[8].abs() < 1e-12 {
            return Err(Error::SingularHomography(0.0));
        }
        let h = Homography(m.map(|v| v / m[8]));
        let det = h.det();
        if det.abs() <= DET_EPS {
            return Err(Error::SingularHomography(det));
        }
        Ok(h)
    }

    /// Builds from the 8 free entries without any validity check.
    pub fn from_params(p: [f64; 8]) -> Self {
        Homography([p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], 1.0])
    }

    pub fn params(&self) -> [f64; 8] {
        let m = &self.0;
        [m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7]]
    }

    pub fn entries(&self) -> &[f64; 9] {
        &self.0
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography([1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0])
    }

    pub fn scale(sx: f64, sy: f64) -> Self {
        Homography([sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn ensure_invertible(&self) -> Result<()> {
        let det = self.det();
        if !det.is_finite() || det.abs() <= DET_EPS {
            return Err(Error::SingularHomography(det));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.0)
    }

    fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let mut a = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                a[r * 3 + c] = m[(r, c)];
            }
        }
        Self::new(a)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.ensure_invertible()?;
        let inv = self.matrix().try_inverse().ok_or(Error::SingularHomography(self.det()))?;
        Self::from_matrix(inv)
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Homography) -> Result<Self> {
        Self::from_matrix(self.matrix() * rhs.matrix())
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.0;
        let w = m[6] * x + m[7] * y + m[8];
        if w.abs() < 1e-12 {
            return None;
        }
        Some(((m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w))
    }

    /// Exact homography through four point correspondences `src[i] -> dst[i]`.
    pub fn from_point_pairs(src: &[(f64, f64); 4], dst: &[(f64, f64); 4]) -> Result<Self> {
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for i in 0..4 {
            let (x, y) = src[i];
            let (u, v) = dst[i];
            let r = 2 * i;
            a.set_row(r, &SMatrix::<f64, 1, 8>::from_row_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]));
            a.set_row(r + 1, &SMatrix::<f64, 1, 8>::from_row_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]));
            b[r] = u;
            b[r + 1] = v;
        }
        let sol = a.lu().solve(&b).ok_or(Error::SingularHomography(0.0))?;
        let h = Homography::from_params([sol[0], sol[1], sol[2], sol[3], sol[4], sol[5], sol[6], sol[7]]);
        h.ensure_invertible()?;
        Ok(h)
    }

    /// Normalized-frame transform expressed between pixel frames:
    /// `pixel_dst <- H_norm <- pixel_src`.
    pub fn to_pixel_frame(&self, src_dims: (usize, usize), dst_dims: (usize, usize)) -> Result<Self> {
        let to_norm = normalize_frame(src_dims);
        let to_pix = normalize_frame(dst_dims).inverse()?;
        to_pix.compose(self)?.compose(&to_norm)
    }

    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Default for Homography {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl TryFrom<[f64; 9]> for Homography {
    type Error = Error;
    fn try_from(m: [f64; 9]) -> Result<Self> {
        Homography::new(m)
    }
}

impl From<Homography> for [f64; 9] {
    fn from(h: Homography) -> Self {
        h.0
    }
}

/// Pixel -> normalized coordinate map for an image of `dims = (w, h)`.
pub fn normalize_frame(dims: (usize, usize)) -> Homography {
    let sx = 2.0 / (dims.0.max(2) - 1) as f64;
    let sy = 2.0 / (dims.1.max(2) - 1) as f64;
    Homography([sx, 0.0, -1.0, 0.0, sy, -1.0, 0.0, 0.0, 1.0])
}
