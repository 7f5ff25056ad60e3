use serde::{Deserialize, Serialize};

use crate::datamodel::{RgbImage, ScalarPlane};
use crate::error::{Error, Result};
use crate::imaging::luma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    #[default]
    Gray,
    Rgb,
}

/// Float image with interleaved channels, values nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::param("raster", "dimensions must be positive"));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{channels} raster needs {} values, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    /// 8-bit image scaled to `[0, 1]`; gray mode uses rounded luma.
    pub fn from_rgb(img: &RgbImage, mode: ColorMode) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data = match mode {
            ColorMode::Gray => img.pixels().map(|&p| f32::from(luma(p)) / 255.0).collect(),
            ColorMode::Rgb => img.as_raw().iter().map(|&v| f32::from(v) / 255.0).collect(),
        };
        let channels = if mode == ColorMode::Gray { 1 } else { 3 };
        Self { width: w, height: h, channels, data }
    }

    pub fn from_plane(plane: &ScalarPlane) -> Self {
        Self { width: plane.width(), height: plane.height(), channels: 1, data: plane.values().to_vec() }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Zero outside the image.
    #[inline]
    pub fn at_padded(&self, x: isize, y: isize, c: usize) -> f32 {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            0.0
        } else {
            self.data[(y as usize * self.width + x as usize) * self.channels + c]
        }
    }

    /// Rounds back to 8 bits (gray rasters are replicated to all channels).
    pub fn to_rgb(&self) -> RgbImage {
        let q = |v: f32| (v * 255.0).round().clamp(0.0, 255.0) as u8;
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let (x, y) = (x as usize, y as usize);
            if self.channels >= 3 {
                image::Rgb([q(self.at(x, y, 0)), q(self.at(x, y, 1)), q(self.at(x, y, 2))])
            } else {
                let g = q(self.at(x, y, 0));
                image::Rgb([g, g, g])
            }
        })
    }

    /// Single-channel luma view (identity for gray rasters).
    pub fn to_gray(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|p| {
                let l = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
                ((l * 255.0).round() / 255.0) as f32
            })
            .collect();
        Raster { width: self.width, height: self.height, channels: 1, data }
    }
}
