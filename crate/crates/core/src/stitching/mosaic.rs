//! Overlap-averaging mosaic assembly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::{save_rgb, PlaneKind, RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::imaging::{render_lifetime, unit_intensity, LifetimeRenderSpec, Weighting};
use crate::par;
use crate::registration::Homography;

use super::placement::{tile_to_slide, TilePlacement};

/// Smallest summed bilinear weight of foreground neighbours for a sample to
/// count as foreground.
const MIN_FOREGROUND_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum TileImage {
    Plane(ScalarPlane),
    Rgb(RgbImage),
}

impl TileImage {
    fn dims(&self) -> (usize, usize) {
        match self {
            TileImage::Plane(p) => p.dims(),
            TileImage::Rgb(i) => (i.width() as usize, i.height() as usize),
        }
    }

    fn channels(&self) -> usize {
        match self {
            TileImage::Plane(_) => 1,
            TileImage::Rgb(_) => 3,
        }
    }

    #[inline]
    fn texel(&self, x: usize, y: usize, out: &mut [f64; 3]) -> bool {
        match self {
            TileImage::Plane(p) => {
                out[0] = f64::from(p.get(x, y));
                out[0] > 0.0
            }
            TileImage::Rgb(i) => {
                let px = i.get_pixel(x as u32, y as u32).0;
                for c in 0..3 {
                    out[c] = f64::from(px[c]);
                }
                px != [0, 0, 0]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StitchOptions {
    /// Output canvas (width, height) in canvas pixels.
    pub canvas: (usize, usize),
    /// Canvas pixels per slide pixel (1 = full resolution).
    pub scale: f64,
    pub render: LifetimeRenderSpec,
}

impl StitchOptions {
    pub fn new(canvas: (usize, usize)) -> Self {
        Self { canvas, scale: 1.0, render: LifetimeRenderSpec::default() }
    }
}

/// Per-pixel count of tiles that contributed foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<u32>,
}

impl Coverage {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.counts[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mosaic {
    pub image: RgbImage,
    pub coverage: Coverage,
    /// Averaged scalar values before rendering (plane tiles only).
    pub averaged: Option<ScalarPlane>,
}

struct Partial {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    sums: Vec<f64>,
    counts: Vec<u32>,
}

fn placement_key(p: &TilePlacement) -> (String, [u32; 4], [u64; 9]) {
    let h = p.homography.entries().map(f64::to_bits);
    (p.tile_id.clone(), [p.patch.x, p.patch.y, p.patch.w, p.patch.h], h)
}

/// Canvas-pixel -> tile-pixel map for one placement.
fn canvas_to_tile(p: &TilePlacement, tile_dims: (usize, usize), scale: f64) -> Result<(Homography, Homography)> {
    let forward = Homography::scale(scale, scale).compose(&tile_to_slide(p, tile_dims)?)?;
    Ok((forward, forward.inverse()?))
}

/// Foreground-weighted bilinear sample with edge clamping over the half-pixel
/// border; `None` when the point is off-tile or mostly background.
fn sample_tile(tile: &TileImage, tx: f64, ty: f64) -> Option<[f64; 3]> {
    let (w, h) = tile.dims();
    let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let (tx, ty) = (snap(tx), snap(ty));
    if !(tx >= -0.5 && ty >= -0.5 && tx < w as f64 - 0.5 && ty < h as f64 - 0.5) {
        return None;
    }
    let cx = tx.clamp(0.0, (w - 1) as f64);
    let cy = ty.clamp(0.0, (h - 1) as f64);
    let x0 = cx.floor() as usize;
    let y0 = cy.floor() as usize;
    let fx = cx - x0 as f64;
    let fy = cy - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let mut acc = [0.0f64; 3];
    let mut weight = 0.0;
    let mut texel = [0.0f64; 3];
    for (xx, yy, wgt) in [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ] {
        if wgt == 0.0 || !tile.texel(xx, yy, &mut texel) {
            continue;
        }
        weight += wgt;
        for c in 0..3 {
            acc[c] += wgt * texel[c];
        }
    }
    if weight < MIN_FOREGROUND_WEIGHT {
        return None;
    }
    Some(acc.map(|v| v / weight))
}

fn warp_partial(p: &TilePlacement, tile: &TileImage, opts: &StitchOptions) -> Result<Option<Partial>> {
    let dims = tile.dims();
    let (fwd, inv) = canvas_to_tile(p, dims, opts.scale)?;
    let (cw, ch) = opts.canvas;
    let (mut minx, mut miny, mut maxx, mut maxy) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (ex, ey) = (dims.0 as f64 - 0.5, dims.1 as f64 - 0.5);
    for (x, y) in [(-0.5, -0.5), (ex, -0.5), (-0.5, ey), (ex, ey)] {
        let (u, v) = fwd.apply(x, y).ok_or(Error::SingularHomography(0.0))?;
        minx = minx.min(u);
        miny = miny.min(v);
        maxx = maxx.max(u);
        maxy = maxy.max(v);
    }
    let x0 = minx.floor().max(0.0) as usize;
    let y0 = miny.floor().max(0.0) as usize;
    let x1 = (maxx.ceil().max(0.0) as usize + 1).min(cw);
    let y1 = (maxy.ceil().max(0.0) as usize + 1).min(ch);
    if x0 >= x1 || y0 >= y1 {
        return Ok(None);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let nc = tile.channels();
    let mut sums = vec![0.0f64; w * h * nc];
    let mut counts = vec![0u32; w * h];
    let rows = par::map_indexed(h, |r| {
        let mut srow = vec![0.0f64; w * nc];
        let mut crow = vec![0u32; w];
        for c in 0..w {
            let Some((tx, ty)) = inv.apply((x0 + c) as f64, (y0 + r) as f64) else { continue };
            if let Some(v) = sample_tile(tile, tx, ty) {
                srow[c * nc..(c + 1) * nc].copy_from_slice(&v[..nc]);
                crow[c] = 1;
            }
        }
        (srow, crow)
    });
    for (r, (srow, crow)) in rows.into_iter().enumerate() {
        sums[r * w * nc..(r + 1) * w * nc].copy_from_slice(&srow);
        counts[r * w..(r + 1) * w].copy_from_slice(&crow);
    }
    Ok(Some(Partial { x0, y0, w, h, sums, counts }))
}

fn check_inputs<'a>(
    placements: &'a [TilePlacement],
    tiles: &'a BTreeMap<String, TileImage>,
    opts: &StitchOptions,
) -> Result<Vec<(&'a TilePlacement, &'a TileImage)>> {
    let (cw, ch) = opts.canvas;
    if cw == 0 || ch == 0 {
        return Err(Error::CanvasTooSmall("canvas has zero area".into()));
    }
    if !(opts.scale.is_finite() && opts.scale > 0.0) {
        return Err(Error::param("scale", "must be a positive number"));
    }
    let mut pairs = Vec::with_capacity(placements.len());
    for p in placements {
        let tile = tiles
            .get(&p.tile_id)
            .ok_or_else(|| Error::param("tiles", format!("no image for tile `{}`", p.tile_id)))?;
        let ex = (f64::from(p.patch.x) + f64::from(p.patch.w)) * opts.scale;
        let ey = (f64::from(p.patch.y) + f64::from(p.patch.h)) * opts.scale;
        if ex > cw as f64 + 1e-9 || ey > ch as f64 + 1e-9 {
            return Err(Error::CanvasTooSmall(format!(
                "patch {} of tile `{}` needs {:.0}x{:.0}, canvas is {cw}x{ch}",
                p.patch, p.tile_id, ex, ey
            )));
        }
        pairs.push((p, tile));
    }
    let first = pairs.first().map(|(_, t)| *t);
    for (_, t) in &pairs {
        let same = match (first, t) {
            (Some(TileImage::Plane(a)), TileImage::Plane(b)) => a.kind() == b.kind(),
            (Some(TileImage::Rgb(_)), TileImage::Rgb(_)) => true,
            _ => false,
        };
        if !same {
            return Err(Error::KindMismatch);
        }
    }
    pairs.sort_by(|a, b| placement_key(a.0).partial_cmp(&placement_key(b.0)).expect("total order"));
    Ok(pairs)
}

/// Sum / count accumulation over foreground contributions only.
fn accumulate(
    pairs: &[(&TilePlacement, &TileImage)],
    opts: &StitchOptions,
    channels: usize,
) -> Result<(Vec<f64>, Vec<u32>)> {
    let (cw, ch) = opts.canvas;
    let partials = par::map_slice(pairs, |(p, t)| warp_partial(p, t, opts));
    let mut sums = vec![0.0f64; cw * ch * channels];
    let mut counts = vec![0u32; cw * ch];
    for part in partials {
        let Some(part) = part? else { continue };
        for r in 0..part.h {
            for c in 0..part.w {
                let src = r * part.w + c;
                if part.counts[src] == 0 {
                    continue;
                }
                let dst = (part.y0 + r) * cw + part.x0 + c;
                counts[dst] += part.counts[src];
                for k in 0..channels {
                    sums[dst * channels + k] += part.sums[src * channels + k];
                }
            }
        }
    }
    Ok((sums, counts))
}

fn average_plane(sums: &[f64], counts: &[u32], canvas: (usize, usize), kind: PlaneKind, wl: Option<f64>) -> ScalarPlane {
    let vals = sums
        .iter()
        .zip(counts)
        .map(|(&s, &n)| if n > 0 { (s / f64::from(n)) as f32 } else { 0.0 })
        .collect();
    ScalarPlane::from_parts(canvas.0, canvas.1, kind, wl, vals)
}

/// Warps every placed tile into the canvas and averages overlaps.
///
/// Plane tiles are averaged first and then rendered with `opts.render`;
/// intensity weighting needs `intensity` tiles, stitched the same way.
/// Uncovered pixels take `background` when given, black otherwise.
pub fn stitch(
    placements: &[TilePlacement],
    tiles: &BTreeMap<String, TileImage>,
    opts: &StitchOptions,
    intensity: Option<&BTreeMap<String, TileImage>>,
    background: Option<&RgbImage>,
) -> Result<Mosaic> {
    let (cw, ch) = opts.canvas;
    if let Some(bg) = background {
        if (bg.width() as usize, bg.height() as usize) != opts.canvas {
            return Err(Error::DimensionMismatch(format!(
                "background is {}x{}, canvas is {cw}x{ch}",
                bg.width(),
                bg.height()
            )));
        }
    }
    let pairs = check_inputs(placements, tiles, opts)?;
    let rgb_tiles = matches!(pairs.first(), Some((_, TileImage::Rgb(_))));
    let channels = if rgb_tiles { 3 } else { 1 };
    let (sums, counts) = accumulate(&pairs, opts, channels)?;

    let (mut image, averaged) = if rgb_tiles {
        let bytes = sums
            .chunks_exact(3)
            .zip(&counts)
            .flat_map(|(s, &n)| {
                let n = f64::from(n.max(1));
                [0, 1, 2].map(|k| (s[k] / n).round().clamp(0.0, 255.0) as u8)
            })
            .collect();
        (RgbImage::from_raw(cw as u32, ch as u32, bytes).expect("canvas sized"), None)
    } else {
        let (kind, wl) = match pairs.first() {
            Some((_, TileImage::Plane(p))) => (p.kind(), p.wavelength_nm()),
            _ => (PlaneKind::LifetimeNs, None),
        };
        let avg = average_plane(&sums, &counts, opts.canvas, kind, wl);
        let weights = match (opts.render.weighting, intensity) {
            (Weighting::None, _) => None,
            (Weighting::Intensity, None) => return Err(Error::MissingIntensity),
            (Weighting::Intensity, Some(it)) => {
                let ipairs = check_inputs(placements, it, opts)?;
                let (is, ic) = accumulate(&ipairs, opts, 1)?;
                Some(unit_intensity(&average_plane(&is, &ic, opts.canvas, PlaneKind::IntensityCounts, wl)))
            }
        };
        (render_lifetime(&avg, weights.as_ref(), &opts.render)?, Some(avg))
    };

    if let Some(bg) = background {
        for (i, (px, &n)) in image.pixels_mut().zip(&counts).enumerate() {
            if n == 0 {
                *px = *bg.get_pixel((i % cw) as u32, (i / cw) as u32);
            }
        }
    }
    Ok(Mosaic { image, coverage: Coverage { width: cw, height: ch, counts }, averaged })
}

/// Side-car written next to a mosaic PNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosaicSidecar {
    pub canvas: (usize, usize),
    pub scale: f64,
    pub render: LifetimeRenderSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    pub placements: Vec<TilePlacement>,
    pub covered_pixels: usize,
}

/// Writes `<png>` and `<png>.json`; returns the sidecar path.
pub fn save_mosaic(
    mosaic: &Mosaic,
    opts: &StitchOptions,
    placements: &[TilePlacement],
    png: &Path,
) -> Result<std::path::PathBuf> {
    save_rgb(&mosaic.image, png)?;
    let sidecar = MosaicSidecar {
        canvas: opts.canvas,
        scale: opts.scale,
        render: opts.render,
        wavelength_nm: mosaic.averaged.as_ref().and_then(|a| a.wavelength_nm()),
        placements: placements.to_vec(),
        covered_pixels: mosaic.coverage.counts.iter().filter(|&&c| c > 0).count(),
    };
    let mut path = png.as_os_str().to_owned();
    path.push(".json");
    let path = std::path::PathBuf::from(path);
    let body = serde_json::to_vec_pretty(&sidecar)?;
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stitching::PatchRect;

    fn constant(w: usize, h: usize, v: f32) -> TileImage {
        TileImage::Plane(ScalarPlane::new(w, h, PlaneKind::LifetimeNs, vec![v; w * h]).unwrap())
    }

    fn place(id: &str, x: u32, y: u32, size: u32) -> TilePlacement {
        TilePlacement {
            tile_id: id.into(),
            patch: PatchRect::new(x, y, size, size),
            homography: Homography::IDENTITY,
            regression_dim: size as usize,
        }
    }

    #[test]
    fn half_overlap_averages_to_midpoint() {
        let tiles = BTreeMap::from([("a".to_string(), constant(8, 8, 2.0)), ("b".to_string(), constant(8, 8, 4.0))]);
        let placements = vec![place("a", 0, 0, 8), place("b", 4, 0, 8)];
        let m = stitch(&placements, &tiles, &StitchOptions::new((12, 8)), None, None).unwrap();
        let avg = m.averaged.unwrap();
        for y in 0..8 {
            for x in 0..12 {
                let want = if x < 4 { 2.0 } else if x < 8 { 3.0 } else { 4.0 };
                assert_eq!(avg.get(x, y), want, "({x},{y})");
                assert_eq!(m.coverage.get(x, y), if (4..8).contains(&x) { 2 } else { 1 });
            }
        }
    }

    #[test]
    fn integer_placement_is_lossless() {
        let img = RgbImage::from_fn(6, 6, |x, y| image::Rgb([1 + (x * 40) as u8, 1 + (y * 40) as u8, 7]));
        let tiles = BTreeMap::from([("t".to_string(), TileImage::Rgb(img.clone()))]);
        let m = stitch(&[place("t", 3, 2, 6)], &tiles, &StitchOptions::new((10, 10)), None, None).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                assert_eq!(m.image.get_pixel(x + 3, y + 2), img.get_pixel(x, y));
            }
        }
        assert_eq!(m.coverage.counts.iter().sum::<u32>(), 36);
        assert_eq!(*m.image.get_pixel(0, 0), image::Rgb([0, 0, 0]));
    }

    #[test]
    fn background_zeros_do_not_dilute() {
        let mut vals = vec![2.0f32; 16];
        vals[5] = 0.0;
        let a = TileImage::Plane(ScalarPlane::new(4, 4, PlaneKind::LifetimeNs, vals).unwrap());
        let tiles = BTreeMap::from([("a".to_string(), a), ("b".to_string(), constant(4, 4, 4.0))]);
        let m = stitch(&[place("a", 0, 0, 4), place("b", 0, 0, 4)], &tiles, &StitchOptions::new((4, 4)), None, None)
            .unwrap();
        let avg = m.averaged.unwrap();
        assert_eq!(avg.get(1, 1), 4.0);
        assert_eq!(avg.get(0, 0), 3.0);
        assert_eq!(m.coverage.get(1, 1), 1);
    }

    #[test]
    fn errors() {
        let tiles = BTreeMap::from([("a".to_string(), constant(4, 4, 1.0))]);
        assert!(matches!(
            stitch(&[place("a", 2, 0, 4)], &tiles, &StitchOptions::new((5, 4)), None, None),
            Err(Error::CanvasTooSmall(_))
        ));
        let mixed = BTreeMap::from([
            ("a".to_string(), constant(4, 4, 1.0)),
            ("b".to_string(), TileImage::Rgb(RgbImage::new(4, 4))),
        ]);
        assert!(matches!(
            stitch(&[place("a", 0, 0, 4), place("b", 0, 0, 4)], &mixed, &StitchOptions::new((8, 8)), None, None),
            Err(Error::KindMismatch)
        ));
    }
}
