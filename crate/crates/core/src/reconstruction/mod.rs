//! Hypercube -> per-wavelength intensity and lifetime planes.

mod decay;

use serde::{Deserialize, Serialize};

pub use decay::{fit_lifetime, DecayFit, MAX_ITERATIONS, MIN_TOTAL_COUNTS, PARAM_TOLERANCE};

use crate::datamodel::{CubeAxes, Hypercube, PlaneKind, ScalarPlane};
use crate::error::{Error, Result};
use crate::par;
use crate::stitching::PatchRect;

/// Default spectral moving-mean width, in bands.
pub const DEFAULT_SMOOTH_WINDOW: usize = 8;
/// Lowest value a nonzero pixel can take after group normalisation.
pub const NORMALIZED_FLOOR: f32 = 1e-3;

/// Moving mean along the spectral axis over `[s - w/2, s + ceil(w/2) - 1]`,
/// clamped to the valid band range (edge bands average fewer samples).
pub fn spectral_smooth(cube: &Hypercube, window: usize) -> Result<Hypercube> {
    let [w, h, bins, t_bins] = cube.dims();
    if window == 0 || window > bins {
        return Err(Error::WindowTooLarge { window, bins });
    }
    let before = window / 2;
    let after = window - before - 1;
    let block = bins * t_bins;
    let counts = cube.to_f32_vec();

    let mut out = vec![0.0f32; counts.len()];
    // one block per (x, y): the [s][t] slab is contiguous
    par::for_each_row_mut(&mut out, block, |pixel, dst| {
        let src = &counts[pixel * block..(pixel + 1) * block];
        let mut prefix = vec![0.0f64; bins + 1];
        for t in 0..t_bins {
            for s in 0..bins {
                prefix[s + 1] = prefix[s] + f64::from(src[s * t_bins + t]);
            }
            for s in 0..bins {
                let lo = s.saturating_sub(before);
                let hi = (s + after).min(bins - 1);
                let mean = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
                dst[s * t_bins + t] = mean as f32;
            }
        }
    });
    debug_assert_eq!(out.len(), w * h * block);
    Hypercube::from_f32(cube.dims(), cube.axes(), out)
}

/// One-band cube holding `spectral_smooth(cube, window)` at `band`, without
/// smoothing the other bands. Values are bitwise equal to the full smooth.
pub fn smoothed_band(cube: &Hypercube, band: usize, window: usize) -> Result<Hypercube> {
    let [w, h, bins, t_bins] = cube.dims();
    if window == 0 || window > bins {
        return Err(Error::WindowTooLarge { window, bins });
    }
    if band >= bins {
        return Err(Error::BandOutOfRange { band, bins });
    }
    let before = window / 2;
    let lo = band.saturating_sub(before);
    let hi = (band + window - before - 1).min(bins - 1);
    let mut out = vec![0.0f32; w * h * t_bins];
    par::for_each_row_mut(&mut out, t_bins, |pixel, dst| {
        let (x, y) = (pixel / h, pixel % h);
        for (t, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0f64;
            let mut below = 0.0f64;
            for s in 0..=hi {
                if s == lo {
                    below = acc;
                }
                acc += f64::from(cube.get(x, y, s, t));
            }
            *d = ((acc - below) / (hi + 1 - lo) as f64) as f32;
        }
    });
    let axes = CubeAxes { wavelength_start_nm: cube.wavelength_of(band), ..cube.axes() };
    Hypercube::from_f32([w, h, 1, t_bins], axes, out)
}

/// Summed intensity and fitted lifetime at one spectral band.
pub fn reconstruct_planes(cube: &Hypercube, band: usize) -> Result<(ScalarPlane, ScalarPlane)> {
    reconstruct_region(cube, band, None)
}

/// As [`reconstruct_planes`], but lifetimes are fitted only inside `region`
/// (zero elsewhere); intensity is always computed everywhere.
pub fn reconstruct_region(
    cube: &Hypercube,
    band: usize,
    region: Option<&PatchRect>,
) -> Result<(ScalarPlane, ScalarPlane)> {
    let [w, h, bins, t_bins] = cube.dims();
    if band >= bins {
        return Err(Error::BandOutOfRange { band, bins });
    }
    let bin_ps = cube.time_bin_ps();
    let rows: Vec<(Vec<f32>, Vec<f32>)> = par::map_indexed(h, |y| {
        let mut decay = vec![0.0f64; t_bins];
        let mut intensity = Vec::with_capacity(w);
        let mut lifetime = Vec::with_capacity(w);
        for x in 0..w {
            cube.decay_into(x, y, band, &mut decay);
            intensity.push(decay.iter().sum::<f64>() as f32);
            if region.is_some_and(|r| !r.contains(x as f64, y as f64)) {
                lifetime.push(0.0);
                continue;
            }
            let tau = match fit_lifetime(&decay, bin_ps) {
                Ok(fit) if fit.tau_ns.is_finite() && fit.tau_ns > 0.0 => fit.tau_ns as f32,
                _ => 0.0,
            };
            lifetime.push(tau);
        }
        (intensity, lifetime)
    });
    let (mut ivals, mut lvals) = (Vec::with_capacity(w * h), Vec::with_capacity(w * h));
    for (i, l) in rows {
        ivals.extend(i);
        lvals.extend(l);
    }
    let wl = Some(cube.wavelength_of(band));
    Ok((
        ScalarPlane::from_parts(w, h, PlaneKind::IntensityCounts, wl, ivals),
        ScalarPlane::from_parts(w, h, PlaneKind::LifetimeNs, wl, lvals),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    /// Mean intensity over the whole plane.
    pub n_hat: f64,
    /// `sqrt(n_hat)`.
    pub threshold: f64,
    pub pixels_zeroed: usize,
}

/// Zeroes both planes wherever intensity is at or below `sqrt(N̂)`, with N̂
/// the mean intensity of the plane.
pub fn photon_noise_filter(
    intensity: &ScalarPlane,
    lifetime: &ScalarPlane,
) -> Result<(ScalarPlane, ScalarPlane, FilterReport)> {
    if intensity.dims() != lifetime.dims() {
        return Err(Error::DimensionMismatch(format!(
            "intensity {:?} vs lifetime {:?}",
            intensity.dims(),
            lifetime.dims()
        )));
    }
    if intensity.kind() != PlaneKind::IntensityCounts {
        return Err(Error::param("intensity", "plane kind must be intensity_counts"));
    }
    let vals = intensity.values();
    if !vals.iter().any(|&v| v > 0.0) {
        return Err(Error::EmptyPlane);
    }
    let n_hat = vals.iter().map(|&v| f64::from(v)).sum::<f64>() / vals.len() as f64;
    let threshold = n_hat.sqrt();

    let mut zeroed = 0;
    let mut ivals = Vec::with_capacity(vals.len());
    let mut lvals = Vec::with_capacity(vals.len());
    for (&i, &l) in vals.iter().zip(lifetime.values()) {
        if f64::from(i) <= threshold {
            if i != 0.0 || l != 0.0 {
                zeroed += 1;
            }
            ivals.push(0.0);
            lvals.push(0.0);
        } else {
            ivals.push(i);
            lvals.push(l);
        }
    }
    Ok((
        intensity.map_values(ivals),
        lifetime.map_values(lvals),
        FilterReport { n_hat, threshold, pixels_zeroed: zeroed },
    ))
}

/// Percentile with linear interpolation between order statistics; `sorted`
/// must be ascending and nonempty.
fn percentile(sorted: &[f32], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    f64::from(sorted[lo]) * (1.0 - frac) + f64::from(sorted[hi]) * frac
}

/// Joint 1st/99th-percentile normalisation of intensity planes from one
/// microarray at one wavelength. Nonzero pixels land in `[NORMALIZED_FLOOR, 1]`.
pub fn normalize_group(planes: &[ScalarPlane]) -> Result<Vec<ScalarPlane>> {
    let first = planes.first().ok_or(Error::EmptyGroup)?;
    for p in planes {
        if p.dims() != first.dims() {
            return Err(Error::DimensionMismatch(format!("group mixes {:?} and {:?}", first.dims(), p.dims())));
        }
        if p.wavelength_nm() != first.wavelength_nm() {
            return Err(Error::param("planes", "group mixes wavelengths"));
        }
        if p.kind() != PlaneKind::IntensityCounts {
            return Err(Error::param("planes", "only intensity planes are normalised"));
        }
    }
    let mut nonzero: Vec<f32> =
        planes.iter().flat_map(|p| p.values().iter().copied().filter(|&v| v > 0.0)).collect();
    if nonzero.is_empty() {
        return Ok(planes.to_vec());
    }
    nonzero.sort_by(f32::total_cmp);
    let lo = percentile(&nonzero, 1.0);
    let hi = percentile(&nonzero, 99.0);
    let floor = f64::from(NORMALIZED_FLOOR);
    let map = |v: f32| -> f32 {
        if v <= 0.0 {
            return 0.0;
        }
        if hi <= lo {
            return 1.0;
        }
        let u = floor + (1.0 - floor) * (f64::from(v) - lo) / (hi - lo);
        u.clamp(floor, 1.0) as f32
    };
    Ok(planes.iter().map(|p| p.map_values(p.values().iter().map(|&v| map(v)).collect())).collect())
}
