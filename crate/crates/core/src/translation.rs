//! False-histology generation: a histogram-matching baseline and an importer
//! for images produced by an external (e.g. CycleGAN) generator.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::Rgb;
use serde::{Deserialize, Serialize};

use crate::datamodel::{load_rgb, RgbImage, ScalarPlane};
use crate::error::{Error, Result};

/// Which translator to use and what it reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TranslatorConfig {
    /// Per-channel histogram matching onto a (background-masked) reference histology image.
    Baseline { reference: PathBuf },
    /// Pre-translated images named `<tile_id>.png` inside `dir`.
    External { dir: PathBuf },
}

impl FromStr for TranslatorConfig {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            Some(("baseline", p)) if !p.is_empty() => Ok(Self::Baseline { reference: p.into() }),
            Some(("external", p)) if !p.is_empty() => Ok(Self::External { dir: p.into() }),
            _ => Err(format!("expected `baseline:<ref.png>` or `external:<dir>`, got `{s}`")),
        }
    }
}

impl fmt::Display for TranslatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Baseline { reference } => write!(f, "baseline:{}", reference.display()),
            Self::External { dir } => write!(f, "external:{}", dir.display()),
        }
    }
}

impl TryFrom<String> for TranslatorConfig {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<TranslatorConfig> for String {
    fn from(c: TranslatorConfig) -> Self {
        c.to_string()
    }
}

pub fn translate(flim_render: &RgbImage, cfg: &TranslatorConfig, tile_id: &str) -> Result<RgbImage> {
    match cfg {
        TranslatorConfig::Baseline { reference } => {
            let reference = load_rgb(reference)?;
            match_histograms(flim_render, &reference)
        }
        TranslatorConfig::External { dir } => import_external(flim_render, dir, tile_id),
    }
}

fn import_external(flim_render: &RgbImage, dir: &Path, tile_id: &str) -> Result<RgbImage> {
    let path = dir.join(format!("{tile_id}.png"));
    if !path.is_file() {
        return Err(Error::MissingExternalImage(tile_id.to_string()));
    }
    let img = load_rgb(&path)?;
    if img.dimensions() != flim_render.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "external image {:?} vs render {:?}",
            img.dimensions(),
            flim_render.dimensions()
        )));
    }
    Ok(img)
}

#[inline]
fn is_foreground(p: &Rgb<u8>) -> bool {
    p.0 != [0, 0, 0]
}

/// Exact histogram specification restricted to foreground (non-black)
/// pixels of both images; background stays black.
///
/// Per channel, source foreground pixels are ranked by value, ties broken by
/// the 3×3 foreground neighbourhood sum and then by position, and the pixel
/// of rank `k` receives the reference value at the same quantile. Ranking
/// (rather than a level-to-level table) lets large single-level populations
/// spread over the reference distribution.
pub fn match_histograms(source: &RgbImage, reference: &RgbImage) -> Result<RgbImage> {
    let src_fg: Vec<usize> = foreground_indices(source);
    let ref_fg: Vec<usize> = foreground_indices(reference);
    if src_fg.is_empty() || ref_fg.is_empty() {
        return Err(Error::EmptyForeground);
    }
    let (ns, nr) = (src_fg.len(), ref_fg.len());
    let (w, h) = (source.width() as usize, source.height() as usize);
    let raw = source.as_raw();
    let mut out = source.clone();
    for c in 0..3 {
        let mut ref_vals: Vec<u8> = ref_fg.iter().map(|&i| reference.as_raw()[i * 3 + c]).collect();
        ref_vals.sort_unstable();
        let neighbourhood = |i: usize| -> u32 {
            let (x, y) = (i % w, i / w);
            let mut sum = 0u32;
            for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    sum += u32::from(raw[(yy * w + xx) * 3 + c]);
                }
            }
            sum
        };
        let mut keyed: Vec<(u8, u32, usize)> = src_fg.iter().map(|&i| (raw[i * 3 + c], neighbourhood(i), i)).collect();
        keyed.sort_unstable();
        let buf: &mut [u8] = &mut out;
        for (k, &(_, _, i)) in keyed.iter().enumerate() {
            buf[i * 3 + c] = ref_vals[(2 * k + 1) * nr / (2 * ns)];
        }
    }
    Ok(out)
}

fn foreground_indices(img: &RgbImage) -> Vec<usize> {
    img.pixels().enumerate().filter(|(_, p)| is_foreground(p)).map(|(i, _)| i).collect()
}

/// Blackens every pixel whose intensity is zero.
pub fn apply_intensity_mask(false_histology: &RgbImage, intensity: &ScalarPlane) -> Result<RgbImage> {
    let dims = (false_histology.width() as usize, false_histology.height() as usize);
    if dims != intensity.dims() {
        return Err(Error::DimensionMismatch(format!("image {dims:?} vs intensity {:?}", intensity.dims())));
    }
    let mut out = false_histology.clone();
    for (p, &v) in out.pixels_mut().zip(intensity.values()) {
        if v == 0.0 {
            *p = Rgb([0, 0, 0]);
        }
    }
    Ok(out)
}
