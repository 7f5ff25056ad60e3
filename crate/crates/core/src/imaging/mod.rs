//! Preprocessing and rendering of planes and RGB images.

mod contrast;
mod render;
mod resize;

pub use contrast::{
    apply_mask, hist_equalize, histogram, invert, level, luma, mask_background, otsu_level, otsu_threshold,
    to_grayscale,
};
pub use render::{
    colormap_rgb, jet, render_intensity, render_lifetime, unit_intensity, Colormap, LifetimeRenderSpec, Weighting,
    JET_ANCHORS,
};
pub use resize::{resize_channels, resize_plane, resize_rgb};

use crate::datamodel::RgbImage;
use crate::error::Result;
use crate::stitching::PatchRect;

/// Copies `rect` out of `img`; the rect must lie inside the image.
pub fn crop(img: &RgbImage, rect: &PatchRect) -> Result<RgbImage> {
    rect.validate_within(img.width(), img.height())?;
    Ok(image::imageops::crop_imm(img, rect.x, rect.y, rect.w, rect.h).to_image())
}

/// `alpha · a + (1 − alpha) · b` per channel, rounded.
pub fn blend(a: &RgbImage, b: &RgbImage, alpha: f64) -> Result<RgbImage> {
    use crate::error::Error;
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.dimensions(), b.dimensions())));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param("alpha", "must lie in [0, 1]"));
    }
    let raw = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| (alpha * f64::from(x) + (1.0 - alpha) * f64::from(y)).round() as u8)
        .collect();
    Ok(RgbImage::from_raw(a.width(), a.height(), raw).expect("same dims"))
}

/// Replicates the luma of every pixel into all three channels.
pub fn gray_rgb(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    for p in out.pixels_mut() {
        let l = luma(*p);
        *p = image::Rgb([l, l, l]);
    }
    out
}
