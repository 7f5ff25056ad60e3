//! Bilinear resampling (pixel-centre aligned, edge-clamped).

use crate::datamodel::{RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::par;

/// Resamples interleaved `channels`-wide data from `src_dims` to `dst_dims`.
pub fn resize_channels(
    src: &[f32],
    src_dims: (usize, usize),
    channels: usize,
    dst_dims: (usize, usize),
) -> Vec<f32> {
    let (sw, sh) = src_dims;
    let (dw, dh) = dst_dims;
    if src_dims == dst_dims {
        return src.to_vec();
    }
    let sx = sw as f64 / dw as f64;
    let sy = sh as f64 / dh as f64;
    let taps = |d: usize, scale: f64, len: usize| -> (usize, usize, f64) {
        let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, s - i0 as f64)
    };
    let xtaps: Vec<_> = (0..dw).map(|x| taps(x, sx, sw)).collect();
    let mut out = vec![0.0f32; dw * dh * channels];
    par::for_each_row_mut(&mut out, dw * channels, |y, row| {
        let (y0, y1, fy) = taps(y, sy, sh);
        for (x, &(x0, x1, fx)) in xtaps.iter().enumerate() {
            for c in 0..channels {
                let at = |xx: usize, yy: usize| f64::from(src[(yy * sw + xx) * channels + c]);
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                row[x * channels + c] = (top * (1.0 - fy) + bottom * fy) as f32;
            }
        }
    });
    out
}

fn check_dims(w: usize, h: usize) -> Result<()> {
    if w == 0 || h == 0 {
        return Err(Error::param("dims", "target width and height must be positive"));
    }
    Ok(())
}

pub fn resize_plane(plane: &ScalarPlane, w: usize, h: usize) -> Result<ScalarPlane> {
    check_dims(w, h)?;
    let vals = resize_channels(plane.values(), plane.dims(), 1, (w, h));
    Ok(ScalarPlane::from_parts(w, h, plane.kind(), plane.wavelength_nm(), vals))
}

pub fn resize_rgb(img: &RgbImage, w: usize, h: usize) -> Result<RgbImage> {
    check_dims(w, h)?;
    let src: Vec<f32> = img.as_raw().iter().map(|&v| f32::from(v)).collect();
    let out = resize_channels(&src, (img.width() as usize, img.height() as usize), 3, (w, h));
    let bytes = out.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    Ok(RgbImage::from_raw(w as u32, h as u32, bytes).expect("buffer sized to dims"))
}
