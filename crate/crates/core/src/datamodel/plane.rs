use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magic bytes opening every scalar-plane file.
pub const PLANE_MAGIC: &[u8; 8] = b"FLIMPLN1";
const HEADER_LEN: usize = 8 + 4 + 4 + 1 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    IntensityCounts,
    LifetimeNs,
}

impl PlaneKind {
    fn tag(self) -> u8 {
        match self {
            PlaneKind::IntensityCounts => 0,
            PlaneKind::LifetimeNs => 1,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(PlaneKind::IntensityCounts),
            1 => Some(PlaneKind::LifetimeNs),
            _ => None,
        }
    }
}

/// Single-channel image: intensity counts or lifetime in ns. Zero means "no data".
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPlane {
    width: usize,
    height: usize,
    kind: PlaneKind,
    wavelength_nm: Option<f64>,
    values: Vec<f32>,
}

impl ScalarPlane {
    /// Builds a plane, rejecting negative or non-finite values.
    pub fn new(width: usize, height: usize, kind: PlaneKind, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} plane needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidValue(format!("plane value {} at index {i}", values[i])));
        }
        Ok(Self { width, height, kind, wavelength_nm: None, values })
    }

    pub fn zeros(width: usize, height: usize, kind: PlaneKind) -> Self {
        Self { width, height, kind, wavelength_nm: None, values: vec![0.0; width * height] }
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        kind: PlaneKind,
        wavelength_nm: Option<f64>,
        values: Vec<f32>,
    ) -> Self {
        debug_assert_eq!(values.len(), width * height);
        debug_assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self { width, height, kind, wavelength_nm, values }
    }

    pub fn with_wavelength(mut self, nm: Option<f64>) -> Self {
        self.wavelength_nm = nm;
        self
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
    pub fn kind(&self) -> PlaneKind {
        self.kind
    }
    pub fn wavelength_nm(&self) -> Option<f64> {
        self.wavelength_nm
    }
    pub fn values(&self) -> &[f32] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// Same geometry and metadata, new values.
    pub(crate) fn map_values(&self, values: Vec<f32>) -> Self {
        Self::from_parts(self.width, self.height, self.kind, self.wavelength_nm, values)
    }

    pub fn max(&self) -> f32 {
        self.values.iter().copied().fold(0.0, f32::max)
    }
}

/// Boolean image gating another image of the same dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} mask needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }
    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// 8-bit rendering: 255 where set.
    pub fn to_luma(&self) -> image::GrayImage {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, data)
            .expect("mask buffer length matches dims")
    }
}

/// Writes a plane in the binary plane format (little-endian throughout).
pub fn save_plane(plane: &ScalarPlane, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_plane(plane)).map_err(|e| Error::io(path, e))
}

pub fn load_plane(path: &Path) -> Result<ScalarPlane> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_plane(&bytes)
}

pub fn decode_plane(bytes: &[u8]) -> Result<ScalarPlane> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != PLANE_MAGIC {
        return Err(Error::CorruptHeader("not a scalar-plane file (bad magic)".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let width = u32_at(8);
    let height = u32_at(12);
    let kind = PlaneKind::from_tag(bytes[16])
        .ok_or_else(|| Error::CorruptHeader(format!("unknown plane kind {}", bytes[16])))?;
    let has_wavelength = match bytes[17] {
        0 => false,
        1 => true,
        other => return Err(Error::CorruptHeader(format!("bad wavelength flag {other}"))),
    };
    let wavelength = f64::from_le_bytes(bytes[18..26].try_into().unwrap());
    let body = &bytes[HEADER_LEN..];
    if body.len() != width * height * 4 {
        return Err(Error::CorruptHeader(format!(
            "{width}x{height} plane needs {} data bytes, file has {}",
            width * height * 4,
            body.len()
        )));
    }
    let values = body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    let plane = ScalarPlane::new(width, height, kind, values)
        .map_err(|e| Error::CorruptHeader(e.to_string()))?;
    Ok(plane.with_wavelength(has_wavelength.then_some(wavelength)))
}

pub fn load_rgb(path: &Path) -> Result<image::RgbImage> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(image::open(path)?.to_rgb8())
}

/// PNG bytes of `img`.
pub fn encode_png(img: &image::RgbImage) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn encode_plane(plane: &ScalarPlane) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + plane.values.len() * 4);
    buf.extend_from_slice(PLANE_MAGIC);
    buf.extend_from_slice(&(plane.width as u32).to_le_bytes());
    buf.extend_from_slice(&(plane.height as u32).to_le_bytes());
    buf.push(plane.kind.tag());
    buf.push(u8::from(plane.wavelength_nm.is_some()));
    buf.extend_from_slice(&plane.wavelength_nm.unwrap_or(0.0).to_le_bytes());
    for v in &plane.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn save_rgb(img: &image::RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
