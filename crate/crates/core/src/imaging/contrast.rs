//! Grayscale conversion, histogram equalisation, Otsu thresholding and
//! histology background masking.

use image::Rgb;

use crate::datamodel::{BinaryMask, PlaneKind, RgbImage, ScalarPlane};
use crate::error::{Error, Result};

/// Rounded Rec.601 luma.
#[inline]
pub fn luma(p: Rgb<u8>) -> u8 {
    let [r, g, b] = p.0;
    (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)).round().clamp(0.0, 255.0) as u8
}

pub fn to_grayscale(img: &RgbImage) -> ScalarPlane {
    let values = img.pixels().map(|&p| f32::from(luma(p))).collect();
    ScalarPlane::from_parts(img.width() as usize, img.height() as usize, PlaneKind::IntensityCounts, None, values)
}

/// `255 - v` for 8-bit planes.
pub fn invert(plane: &ScalarPlane) -> ScalarPlane {
    plane.map_values(plane.values().iter().map(|&v| 255.0 - level(v) as f32).collect())
}

/// Nearest 8-bit level of a plane value.
#[inline]
pub fn level(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn histogram(plane: &ScalarPlane) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in plane.values() {
        hist[level(v) as usize] += 1;
    }
    hist
}

/// 256-bin CDF remapping: `v -> floor(255 · cdf(v) / N)`.
pub fn hist_equalize(plane: &ScalarPlane) -> ScalarPlane {
    let hist = histogram(plane);
    let n = plane.values().len() as u64;
    if n == 0 {
        return plane.clone();
    }
    let mut lut = [0f32; 256];
    let mut cdf = 0u64;
    for (l, &count) in hist.iter().enumerate() {
        cdf += count;
        lut[l] = ((255 * cdf) / n) as f32;
    }
    plane.map_values(plane.values().iter().map(|&v| lut[level(v) as usize]).collect())
}

/// Otsu's threshold over the 256 8-bit levels. Pixels strictly above the
/// returned level are set in the mask; ties go to the lowest level.
pub fn otsu_threshold(plane: &ScalarPlane) -> Result<(u8, BinaryMask)> {
    let hist = histogram(plane);
    let threshold = otsu_level(&hist)?;
    let bits = plane.values().iter().map(|&v| level(v) > threshold).collect();
    Ok((threshold, BinaryMask::new(plane.width(), plane.height(), bits)?))
}

/// Level maximising the between-class variance `n0·n1·(μ0 − μ1)²`.
///
/// Scores are compared exactly in integer arithmetic, so ties are genuine
/// and resolve to the lowest level.
pub fn otsu_level(hist: &[u64; 256]) -> Result<u8> {
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let n: u64 = hist.iter().sum();
    let total: u64 = hist.iter().enumerate().map(|(l, &c)| l as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    // best score as the fraction d² / (n0·n1)
    let mut best: Option<(u8, u128, u64)> = None;
    for (t, &count) in hist.iter().enumerate() {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // n0·n1·(μ0 − μ1)² = (N·S0 − n0·S)² / (n0·n1)
        let d = (i128::from(n) * i128::from(s0) - i128::from(n0) * i128::from(total)).unsigned_abs();
        let num = d * d;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => wide_mul(num, bd) > wide_mul(bn, den),
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    Ok(best.map_or(0, |b| b.0))
}

/// Full 192-bit product, most significant limb first.
fn wide_mul(x: u128, y: u64) -> [u64; 3] {
    let lo = (x as u64 as u128) * u128::from(y);
    let hi = (x >> 64) * u128::from(y) + (lo >> 64);
    [(hi >> 64) as u64, hi as u64, lo as u64]
}

/// Blackens the bright slide background of an H&E image:
/// grayscale -> invert -> equalise -> Otsu -> multiply the mask into the image.
pub fn mask_background(histology: &RgbImage) -> Result<(RgbImage, BinaryMask)> {
    let gray = to_grayscale(histology);
    let enhanced = hist_equalize(&invert(&gray));
    let (_, mask) = otsu_threshold(&enhanced)?;
    Ok((apply_mask(histology, &mask)?, mask))
}

pub fn apply_mask(img: &RgbImage, mask: &BinaryMask) -> Result<RgbImage> {
    if (img.width() as usize, img.height() as usize) != (mask.width(), mask.height()) {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs mask {}x{}",
            img.width(),
            img.height(),
            mask.width(),
            mask.height()
        )));
    }
    let mut out = img.clone();
    for (p, &keep) in out.pixels_mut().zip(mask.bits()) {
        if !keep {
            *p = Rgb([0, 0, 0]);
        }
    }
    Ok(out)
}
