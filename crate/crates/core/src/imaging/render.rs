//! Colormaps and lifetime rendering.

use image::Rgb;
use serde::{Deserialize, Serialize};

use crate::datamodel::{PlaneKind, RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    #[default]
    Jet,
    Gray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    None,
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeRenderSpec {
    pub range_min: f64,
    pub range_max: f64,
    pub colormap: Colormap,
    pub weighting: Weighting,
}

impl Default for LifetimeRenderSpec {
    /// 1–3 ns jet, unweighted: the stitched-mosaic display window.
    fn default() -> Self {
        Self { range_min: 1.0, range_max: 3.0, colormap: Colormap::Jet, weighting: Weighting::None }
    }
}

impl LifetimeRenderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_min < self.range_max) || !self.range_min.is_finite() || !self.range_max.is_finite() {
            return Err(Error::param("render_range", "range_min must be below range_max"));
        }
        Ok(())
    }
}

/// Classic jet anchors: (position, r, g, b).
pub const JET_ANCHORS: [(f64, [f64; 3]); 6] = [
    (0.0, [0.0, 0.0, 0.5]),
    (0.125, [0.0, 0.0, 1.0]),
    (0.375, [0.0, 1.0, 1.0]),
    (0.625, [1.0, 1.0, 0.0]),
    (0.875, [1.0, 0.0, 0.0]),
    (1.0, [0.5, 0.0, 0.0]),
];

/// Piecewise-linear jet at `u` in `[0, 1]`, channels in `[0, 1]`.
pub fn jet(u: f64) -> [f64; 3] {
    let u = u.clamp(0.0, 1.0);
    for pair in JET_ANCHORS.windows(2) {
        let (p0, c0) = pair[0];
        let (p1, c1) = pair[1];
        if u <= p1 {
            let f = (u - p0) / (p1 - p0);
            return [0, 1, 2].map(|i| c0[i] + (c1[i] - c0[i]) * f);
        }
    }
    JET_ANCHORS[5].1
}

pub fn colormap_rgb(map: Colormap, u: f64) -> [f64; 3] {
    match map {
        Colormap::Jet => jet(u),
        Colormap::Gray => {
            let g = u.clamp(0.0, 1.0);
            [g, g, g]
        }
    }
}

/// Lifetime -> RGB. Zero lifetimes render black; intensity weighting scales
/// each pixel's RGB by the normalized intensity.
pub fn render_lifetime(
    lifetime: &ScalarPlane,
    intensity: Option<&ScalarPlane>,
    spec: &LifetimeRenderSpec,
) -> Result<RgbImage> {
    spec.validate()?;
    let weights = match spec.weighting {
        Weighting::None => None,
        Weighting::Intensity => {
            let i = intensity.ok_or(Error::MissingIntensity)?;
            if i.dims() != lifetime.dims() {
                return Err(Error::DimensionMismatch(format!(
                    "lifetime {:?} vs intensity {:?}",
                    lifetime.dims(),
                    i.dims()
                )));
            }
            Some(i.values())
        }
    };
    let (w, h) = lifetime.dims();
    let span = spec.range_max - spec.range_min;
    let mut buf = vec![0u8; w * h * 3];
    par::for_each_row_mut(&mut buf, w * 3, |y, row| {
        for x in 0..w {
            let idx = y * w + x;
            let tau = f64::from(lifetime.values()[idx]);
            if tau <= 0.0 {
                continue;
            }
            let u = (tau.clamp(spec.range_min, spec.range_max) - spec.range_min) / span;
            let weight = weights.map_or(1.0, |ws| f64::from(ws[idx]).clamp(0.0, 1.0));
            let rgb = colormap_rgb(spec.colormap, u);
            for c in 0..3 {
                row[x * 3 + c] = (rgb[c] * weight * 255.0).round() as u8;
            }
        }
    });
    Ok(RgbImage::from_raw(w as u32, h as u32, buf).expect("buffer sized to dims"))
}

/// Min-max stretch of an intensity plane to `[0, 1]` over its own maximum.
pub fn unit_intensity(plane: &ScalarPlane) -> ScalarPlane {
    let max = plane.max();
    let vals = if max > 0.0 { plane.values().iter().map(|&v| v / max).collect() } else { plane.values().to_vec() };
    ScalarPlane::from_parts(plane.width(), plane.height(), PlaneKind::IntensityCounts, plane.wavelength_nm(), vals)
}

/// Gray rendering of an intensity plane, scaled by its maximum.
pub fn render_intensity(plane: &ScalarPlane) -> RgbImage {
    let max = plane.max();
    let (w, h) = plane.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = if max > 0.0 { plane.get(x as usize, y as usize) / max } else { 0.0 };
        let g = (v * 255.0).round() as u8;
        Rgb([g, g, g])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(v: &[f32]) -> ScalarPlane {
        ScalarPlane::new(v.len(), 1, PlaneKind::LifetimeNs, v.to_vec()).unwrap()
    }

    #[test]
    fn jet_anchors_are_exact() {
        assert_eq!(jet(0.0), [0.0, 0.0, 0.5]);
        assert_eq!(jet(0.375), [0.0, 1.0, 1.0]);
        assert_eq!(jet(0.5), [0.5, 1.0, 0.5]);
        assert_eq!(jet(1.0), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn range_min_renders_dark_blue() {
        let img = render_lifetime(&lt(&[1.0, 0.2, 1.0]), None, &LifetimeRenderSpec::default()).unwrap();
        for p in img.pixels() {
            assert_eq!(*p, Rgb([0, 0, 128]));
        }
    }

    #[test]
    fn zero_lifetime_is_black_and_zero_intensity_blacks_out() {
        let spec = LifetimeRenderSpec { weighting: Weighting::Intensity, ..Default::default() };
        let i = ScalarPlane::new(3, 1, PlaneKind::IntensityCounts, vec![0.0, 1.0, 0.5]).unwrap();
        let img = render_lifetime(&lt(&[2.0, 0.0, 3.0]), Some(&i), &spec).unwrap();
        assert_eq!(*img.get_pixel(0, 0), Rgb([0, 0, 0]));
        assert_eq!(*img.get_pixel(1, 0), Rgb([0, 0, 0]));
        assert_eq!(*img.get_pixel(2, 0), Rgb([64, 0, 0]));
    }

    #[test]
    fn weighting_needs_intensity() {
        let spec = LifetimeRenderSpec { weighting: Weighting::Intensity, ..Default::default() };
        assert!(matches!(render_lifetime(&lt(&[2.0]), None, &spec), Err(Error::MissingIntensity)));
        let i = ScalarPlane::zeros(2, 1, PlaneKind::IntensityCounts);
        assert!(matches!(render_lifetime(&lt(&[2.0]), Some(&i), &spec), Err(Error::DimensionMismatch(_))));
        let bad = LifetimeRenderSpec { range_min: 3.0, range_max: 1.0, ..Default::default() };
        assert!(render_lifetime(&lt(&[2.0]), None, &bad).is_err());
    }

    #[test]
    fn gray_render_is_monotone() {
        let spec = LifetimeRenderSpec { colormap: Colormap::Gray, ..Default::default() };
        let taus: Vec<f32> = (1..200).map(|i| i as f32 * 0.02).collect();
        let img = render_lifetime(&lt(&taus), None, &spec).unwrap();
        let vals: Vec<u8> = img.pixels().map(|p| p.0[0]).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
