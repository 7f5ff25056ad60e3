//! Per-cell spectral lifetime probing.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::datamodel::ScalarPlane;
use crate::error::{Error, Result};

use super::placement::{tile_to_slide, TilePlacement};

pub const DEFAULT_PROBE_WINDOW: usize = 5;
pub const DEFAULT_BAND_RANGE: (f64, f64) = (500.0, 680.0);
pub const PROBE_CSV_HEADER: &str = "wavelength_nm,lifetime_ns";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub wavelength_nm: f64,
    pub lifetime_ns: f64,
}

/// Mean nonzero lifetime in a `window × window` neighbourhood of the slide
/// point `(x, y)`, per band with wavelength in `band_range` (inclusive).
///
/// `planes[tile_id]` holds that tile's lifetime planes, one per band, each
/// tagged with its wavelength. Bands where no sample is nonzero report 0.
pub fn probe_cell(
    point: (f64, f64),
    placements: &[TilePlacement],
    planes: &BTreeMap<String, Vec<ScalarPlane>>,
    band_range: (f64, f64),
    window: usize,
) -> Result<Vec<ProbeRow>> {
    if window % 2 == 0 {
        return Err(Error::InvalidWindow(window));
    }
    if !(band_range.0 <= band_range.1) {
        return Err(Error::param("band_range", "band_min must not exceed band_max"));
    }
    let (px, py) = point;
    let r = (window / 2) as i64;

    let mut covering = Vec::new();
    for p in placements {
        let Some(tile_planes) = planes.get(&p.tile_id) else { continue };
        let Some(first) = tile_planes.first() else { continue };
        let dims = first.dims();
        let inv = tile_to_slide(p, dims)?.inverse()?;
        let Some((tx, ty)) = inv.apply(px, py) else { continue };
        if tx >= -0.5 && ty >= -0.5 && tx < dims.0 as f64 - 0.5 && ty < dims.1 as f64 - 0.5 {
            covering.push((inv, tile_planes));
        }
    }
    if covering.is_empty() {
        return Err(Error::PointNotCovered { x: px, y: py });
    }

    // wavelength (as ordered bits) -> (sum, count)
    let mut bands: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for (inv, tile_planes) in &covering {
        for plane in tile_planes.iter() {
            let Some(wl) = plane.wavelength_nm() else {
                return Err(Error::param("planes", "lifetime planes must carry a wavelength"));
            };
            if wl < band_range.0 || wl > band_range.1 {
                continue;
            }
            let entry = bands.entry(ordered_bits(wl)).or_insert((wl, 0.0, 0));
            let (w, h) = plane.dims();
            for dy in -r..=r {
                for dx in -r..=r {
                    let Some((tx, ty)) = inv.apply(px + dx as f64, py + dy as f64) else { continue };
                    let (ix, iy) = (tx.round(), ty.round());
                    if ix < 0.0 || iy < 0.0 || ix >= w as f64 || iy >= h as f64 {
                        continue;
                    }
                    let v = plane.get(ix as usize, iy as usize);
                    if v > 0.0 {
                        entry.1 += f64::from(v);
                        entry.2 += 1;
                    }
                }
            }
        }
    }
    Ok(bands
        .into_values()
        .map(|(wl, sum, n)| ProbeRow { wavelength_nm: wl, lifetime_ns: if n > 0 { sum / n as f64 } else { 0.0 } })
        .collect())
}

fn ordered_bits(v: f64) -> u64 {
    // wavelengths are positive, so raw bits already sort numerically
    v.to_bits()
}

pub fn write_probe_csv(rows: &[ProbeRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{PROBE_CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{},{}", row.wavelength_nm, row.lifetime_ns)?;
    }
    Ok(())
}
