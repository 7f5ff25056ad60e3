//! Multi-stage workflows shared by the command line and the service: tile
//! preparation, registration of a tile against a slide patch, previews,
//! lifetime mosaics and cell probes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::{Hypercube, RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::imaging::{blend, crop, gray_rgb, mask_background, render_lifetime, resize_rgb, LifetimeRenderSpec, Weighting};
use crate::reconstruction::{
    normalize_group, photon_noise_filter, reconstruct_region, smoothed_band, FilterReport, DEFAULT_SMOOTH_WINDOW,
};
use crate::registration::{regress, warp_rgb, ProgressSink, RegressionParams, RegressionResult};
use crate::stitching::{probe_cell, stitch, tile_to_slide, Mosaic, PatchRect, ProbeRow, StitchOptions, TileImage, TilePlacement};
use crate::translation::{apply_intensity_mask, translate, TranslatorConfig};

/// Band used when a caller names neither a band nor a wavelength.
pub const DEFAULT_WAVELENGTH_NM: f64 = 527.0;

/// How a tile is turned into planes and a colour render.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TileOptions {
    pub smooth_window: usize,
    pub filter: bool,
    pub render: LifetimeRenderSpec,
}

impl Default for TileOptions {
    fn default() -> Self {
        Self {
            smooth_window: DEFAULT_SMOOTH_WINDOW,
            filter: true,
            render: LifetimeRenderSpec { weighting: Weighting::Intensity, ..LifetimeRenderSpec::default() },
        }
    }
}

/// Band whose centre wavelength is nearest `nm`, clamped to the cube.
pub fn band_for_wavelength(cube: &Hypercube, nm: f64) -> usize {
    let step = cube.axes().wavelength_step_nm;
    let raw = ((nm - cube.wavelength_of(0)) / step).round();
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(cube.spectral_bins() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TilePlanes {
    pub intensity: ScalarPlane,
    pub lifetime: ScalarPlane,
    /// `None` when filtering was off or the band held no photons.
    pub filter: Option<FilterReport>,
}

/// Smooth -> reconstruct -> (optionally) filter one band of a tile.
/// `region` limits lifetime fitting to a rectangle of tile pixels.
pub fn tile_planes(cube: &Hypercube, band: usize, opts: &TileOptions, region: Option<&PatchRect>) -> Result<TilePlanes> {
    let one = smoothed_band(cube, band, opts.smooth_window)?;
    let (intensity, lifetime) = reconstruct_region(&one, 0, region)?;
    if !opts.filter {
        return Ok(TilePlanes { intensity, lifetime, filter: None });
    }
    match photon_noise_filter(&intensity, &lifetime) {
        Ok((i, l, report)) => Ok(TilePlanes { intensity: i, lifetime: l, filter: Some(report) }),
        Err(Error::EmptyPlane) => Ok(TilePlanes { intensity, lifetime, filter: None }),
        Err(e) => Err(e),
    }
}

/// Colour render of a tile; intensity weighting uses the tile's own
/// percentile-normalised intensity.
pub fn render_tile(planes: &TilePlanes, spec: &LifetimeRenderSpec) -> Result<RgbImage> {
    let unit = normalize_group(std::slice::from_ref(&planes.intensity))?;
    render_lifetime(&planes.lifetime, Some(&unit[0]), spec)
}

/// Translate a tile render and blacken its zero-intensity pixels.
pub fn false_histology(
    render: &RgbImage,
    intensity: &ScalarPlane,
    translator: &TranslatorConfig,
    tile_id: &str,
) -> Result<RgbImage> {
    let translated = translate(render, translator, tile_id)?;
    apply_intensity_mask(&translated, intensity)
}

/// Everything a registration of one tile against one slide patch needs.
#[derive(Debug, Clone)]
pub struct RegistrationInputs {
    /// False histology of the tile.
    pub moving: RgbImage,
    /// Background-masked histology patch.
    pub target: RgbImage,
    /// Unmasked histology patch.
    pub patch_image: RgbImage,
}

pub fn prepare_registration(
    cube: &Hypercube,
    band: usize,
    opts: &TileOptions,
    translator: &TranslatorConfig,
    tile_id: &str,
    slide: &RgbImage,
    patch: &PatchRect,
) -> Result<RegistrationInputs> {
    let patch_image = crop(slide, patch)?;
    let (target, _) = mask_background(&patch_image)?;
    let planes = tile_planes(cube, band, opts, None)?;
    let render = render_tile(&planes, &opts.render)?;
    let moving = false_histology(&render, &planes.intensity, translator, tile_id)?;
    Ok(RegistrationInputs { moving, target, patch_image })
}

pub fn register_tile(
    inputs: &RegistrationInputs,
    params: &RegressionParams,
    sink: &dyn ProgressSink,
    tile_id: &str,
    patch: &PatchRect,
) -> Result<RegressionResult> {
    let mut result = regress(&inputs.moving, &inputs.target, params, sink)?;
    result.tile_id = Some(tile_id.to_string());
    result.patch = Some(*patch);
    Ok(result)
}

pub fn placement_of(result: &RegressionResult) -> Result<TilePlacement> {
    let tile_id = result.tile_id.clone().ok_or_else(|| Error::param("tile_id", "result names no tile"))?;
    let patch = result.patch.ok_or_else(|| Error::param("patch", "result names no patch"))?;
    Ok(TilePlacement { tile_id, patch, homography: result.homography, regression_dim: result.params.regression_dim })
}

/// Warped false histology over the histology patch:
/// `alpha = 1` shows only the warp, `alpha = 0` only the patch.
pub fn preview(moving: &RgbImage, patch_image: &RgbImage, result: &RegressionResult, alpha: f64, gray: bool) -> Result<RgbImage> {
    let g = result.homography.inverse()?;
    let dims = (patch_image.width() as usize, patch_image.height() as usize);
    let warped = warp_rgb(moving, &g, dims)?;
    if gray {
        blend(&gray_rgb(&warped), &gray_rgb(patch_image), alpha)
    } else {
        blend(&warped, patch_image, alpha)
    }
}

/// Stitches lifetime planes of several tiles at one band. Intensity weights,
/// when requested, come from the joint normalisation of all tiles.
pub fn lifetime_mosaic(
    placements: &[TilePlacement],
    planes: &BTreeMap<String, TilePlanes>,
    opts: &StitchOptions,
    background: Option<&RgbImage>,
) -> Result<Mosaic> {
    let tiles: BTreeMap<String, TileImage> =
        planes.iter().map(|(id, p)| (id.clone(), TileImage::Plane(p.lifetime.clone()))).collect();
    if opts.render.weighting == Weighting::None {
        return stitch(placements, &tiles, opts, None, background);
    }
    let ids: Vec<&String> = planes.keys().collect();
    let group: Vec<ScalarPlane> = planes.values().map(|p| p.intensity.clone()).collect();
    let normalized = normalize_group(&group)?;
    let intensity: BTreeMap<String, TileImage> =
        ids.into_iter().cloned().zip(normalized.into_iter().map(TileImage::Plane)).collect();
    stitch(placements, &tiles, opts, Some(&intensity), background)
}

/// Blends a mosaic with the slide resampled to the canvas size.
pub fn blend_with_slide(mosaic: &RgbImage, slide: &RgbImage, alpha: f64) -> Result<RgbImage> {
    let resized = if slide.dimensions() == mosaic.dimensions() {
        slide.clone()
    } else {
        resize_rgb(slide, mosaic.width() as usize, mosaic.height() as usize)?
    };
    blend(mosaic, &resized, alpha)
}

/// Tile-pixel rectangle sampled by a probe window at `point`, padded by a pixel.
fn probe_region(p: &TilePlacement, dims: (usize, usize), point: (f64, f64), window: usize) -> Result<Option<PatchRect>> {
    let inv = tile_to_slide(p, dims)?.inverse()?;
    let r = (window / 2) as f64;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (dx, dy) in [(-r, -r), (r, -r), (-r, r), (r, r)] {
        let Some((tx, ty)) = inv.apply(point.0 + dx, point.1 + dy) else { return Ok(None) };
        x0 = x0.min(tx);
        y0 = y0.min(ty);
        x1 = x1.max(tx);
        y1 = y1.max(ty);
    }
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let lo_x = (x0.round() - 1.0).clamp(0.0, w);
    let lo_y = (y0.round() - 1.0).clamp(0.0, h);
    let hi_x = (x1.round() + 2.0).clamp(0.0, w);
    let hi_y = (y1.round() + 2.0).clamp(0.0, h);
    if hi_x <= lo_x || hi_y <= lo_y {
        return Ok(None);
    }
    Ok(Some(PatchRect::new(lo_x as u32, lo_y as u32, (hi_x - lo_x) as u32, (hi_y - lo_y) as u32)))
}

/// Spectral lifetime curve at a slide point, reconstructing only the tile
/// pixels the probe window can reach.
pub fn probe_tiles(
    point: (f64, f64),
    placements: &[TilePlacement],
    cubes: &BTreeMap<String, Hypercube>,
    band_range: (f64, f64),
    window: usize,
    opts: &TileOptions,
) -> Result<Vec<ProbeRow>> {
    if window % 2 == 0 {
        return Err(Error::InvalidWindow(window));
    }
    let mut planes: BTreeMap<String, Vec<ScalarPlane>> = BTreeMap::new();
    for p in placements {
        let cube = cubes.get(&p.tile_id).ok_or_else(|| Error::param("tiles", format!("no hypercube for `{}`", p.tile_id)))?;
        let dims = (cube.width(), cube.height());
        let Some(region) = probe_region(p, dims, point, window)? else { continue };
        let bands: Vec<usize> = (0..cube.spectral_bins())
            .filter(|&b| (band_range.0..=band_range.1).contains(&cube.wavelength_of(b)))
            .collect();
        let mut tile = Vec::with_capacity(bands.len());
        for b in bands {
            tile.push(tile_planes(cube, b, opts, Some(&region))?.lifetime);
        }
        planes.insert(p.tile_id.clone(), tile);
    }
    probe_cell(point, placements, &planes, band_range, window)
}
