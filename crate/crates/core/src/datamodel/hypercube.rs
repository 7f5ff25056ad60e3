use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-bin width assumed when a manifest does not state one.
pub const DEFAULT_TIME_BIN_PS: f64 = 50.0;

pub const LAYOUT_XYST: &str = "row-major x,y,s,t";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleType {
    U16,
    F32,
}

impl SampleType {
    pub fn size(self) -> usize {
        match self {
            SampleType::U16 => 2,
            SampleType::F32 => 4,
        }
    }
}

/// On-disk description of a hypercube: JSON next to a raw little-endian blob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypercubeManifest {
    pub width: usize,
    pub height: usize,
    pub spectral_bins: usize,
    pub time_bins: usize,
    pub wavelength_start_nm: f64,
    pub wavelength_step_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_bin_ps: Option<f64>,
    pub dtype: SampleType,
    #[serde(default = "default_layout")]
    pub layout: String,
    /// Relative paths are resolved against the manifest's directory.
    pub data_file: PathBuf,
}

fn default_layout() -> String {
    LAYOUT_XYST.to_string()
}

impl HypercubeManifest {
    pub fn element_count(&self) -> usize {
        self.width * self.height * self.spectral_bins * self.time_bins
    }

    pub fn byte_len(&self) -> u64 {
        self.element_count() as u64 * self.dtype.size() as u64
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.spectral_bins == 0 || self.time_bins == 0 {
            return Err(Error::InvalidManifest("all dimensions must be positive".into()));
        }
        if !(self.wavelength_step_nm > 0.0) || !self.wavelength_start_nm.is_finite() {
            return Err(Error::InvalidManifest("wavelength axis must be finite with a positive step".into()));
        }
        if let Some(tb) = self.time_bin_ps {
            if !(tb > 0.0) || !tb.is_finite() {
                return Err(Error::InvalidManifest("time_bin_ps must be positive".into()));
            }
        }
        if self.layout != LAYOUT_XYST {
            return Err(Error::InvalidManifest(format!("unsupported layout `{}`", self.layout)));
        }
        Ok(())
    }

    /// Checks the declared shape against the size of the data file on disk
    /// without reading it.
    pub fn check_data_len(&self, actual_bytes: u64) -> Result<()> {
        if actual_bytes != self.byte_len() {
            return Err(Error::DimensionMismatch(format!(
                "manifest declares {}x{}x{}x{} {:?} = {} bytes, data file holds {} bytes",
                self.width,
                self.height,
                self.spectral_bins,
                self.time_bins,
                self.dtype,
                self.byte_len(),
                actual_bytes
            )));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidManifest(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn resolve_data_path(&self, manifest_path: &Path) -> PathBuf {
        if self.data_file.is_absolute() {
            self.data_file.clone()
        } else {
            manifest_path.parent().unwrap_or(Path::new(".")).join(&self.data_file)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Counts {
    U16(Vec<u16>),
    F32(Vec<f32>),
}

/// 4-D photon-count array indexed `(x, y, s, t)`, `t` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypercube {
    width: usize,
    height: usize,
    spectral_bins: usize,
    time_bins: usize,
    wavelength_start_nm: f64,
    wavelength_step_nm: f64,
    time_bin_ps: f64,
    counts: Counts,
}

/// Axis metadata shared by constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeAxes {
    pub wavelength_start_nm: f64,
    pub wavelength_step_nm: f64,
    pub time_bin_ps: f64,
}

impl Default for CubeAxes {
    fn default() -> Self {
        Self { wavelength_start_nm: 500.0, wavelength_step_nm: 280.0 / 512.0, time_bin_ps: DEFAULT_TIME_BIN_PS }
    }
}

impl Hypercube {
    pub fn from_f32(dims: [usize; 4], axes: CubeAxes, counts: Vec<f32>) -> Result<Self> {
        Self::check(dims, &axes, counts.len())?;
        if let Some(index) = counts.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::NegativeCount { index });
        }
        Ok(Self::assemble(dims, axes, Counts::F32(counts)))
    }

    pub fn from_u16(dims: [usize; 4], axes: CubeAxes, counts: Vec<u16>) -> Result<Self> {
        Self::check(dims, &axes, counts.len())?;
        Ok(Self::assemble(dims, axes, Counts::U16(counts)))
    }

    fn check(dims: [usize; 4], axes: &CubeAxes, len: usize) -> Result<()> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidValue("hypercube dimensions must be positive".into()));
        }
        if !(axes.wavelength_step_nm > 0.0 && axes.time_bin_ps > 0.0) {
            return Err(Error::InvalidValue("wavelength step and time bin must be positive".into()));
        }
        let expected: usize = dims.iter().product();
        if len != expected {
            return Err(Error::DimensionMismatch(format!("{dims:?} needs {expected} counts, got {len}")));
        }
        Ok(())
    }

    fn assemble(dims: [usize; 4], axes: CubeAxes, counts: Counts) -> Self {
        Self {
            width: dims[0],
            height: dims[1],
            spectral_bins: dims[2],
            time_bins: dims[3],
            wavelength_start_nm: axes.wavelength_start_nm,
            wavelength_step_nm: axes.wavelength_step_nm,
            time_bin_ps: axes.time_bin_ps,
            counts,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn spectral_bins(&self) -> usize {
        self.spectral_bins
    }
    pub fn time_bins(&self) -> usize {
        self.time_bins
    }
    pub fn dims(&self) -> [usize; 4] {
        [self.width, self.height, self.spectral_bins, self.time_bins]
    }
    pub fn axes(&self) -> CubeAxes {
        CubeAxes {
            wavelength_start_nm: self.wavelength_start_nm,
            wavelength_step_nm: self.wavelength_step_nm,
            time_bin_ps: self.time_bin_ps,
        }
    }
    pub fn time_bin_ps(&self) -> f64 {
        self.time_bin_ps
    }

    pub fn wavelength_of(&self, band: usize) -> f64 {
        self.wavelength_start_nm + band as f64 * self.wavelength_step_nm
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, s: usize, t: usize) -> usize {
        ((x * self.height + y) * self.spectral_bins + s) * self.time_bins + t
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, s: usize, t: usize) -> f32 {
        let i = self.index(x, y, s, t);
        match &self.counts {
            Counts::U16(v) => f32::from(v[i]),
            Counts::F32(v) => v[i],
        }
    }

    /// Copies the decay curve at `(x, y, s)` into `out` (length `time_bins`).
    pub fn decay_into(&self, x: usize, y: usize, s: usize, out: &mut [f64]) {
        let start = self.index(x, y, s, 0);
        let range = start..start + self.time_bins;
        match &self.counts {
            Counts::U16(v) => out.iter_mut().zip(&v[range]).for_each(|(o, &c)| *o = f64::from(c)),
            Counts::F32(v) => out.iter_mut().zip(&v[range]).for_each(|(o, &c)| *o = f64::from(c)),
        }
    }

    /// All counts widened to `f32`, in storage order.
    pub fn to_f32_vec(&self) -> Vec<f32> {
        match &self.counts {
            Counts::U16(v) => v.iter().map(|&c| f32::from(c)).collect(),
            Counts::F32(v) => v.clone(),
        }
    }

    pub fn manifest(&self, data_file: impl Into<PathBuf>) -> HypercubeManifest {
        HypercubeManifest {
            width: self.width,
            height: self.height,
            spectral_bins: self.spectral_bins,
            time_bins: self.time_bins,
            wavelength_start_nm: self.wavelength_start_nm,
            wavelength_step_nm: self.wavelength_step_nm,
            time_bin_ps: Some(self.time_bin_ps),
            dtype: match self.counts {
                Counts::U16(_) => SampleType::U16,
                Counts::F32(_) => SampleType::F32,
            },
            layout: LAYOUT_XYST.to_string(),
            data_file: data_file.into(),
        }
    }
}

/// Loads and validates a hypercube from its JSON manifest.
pub fn load_hypercube(manifest_path: &Path) -> Result<Hypercube> {
    let manifest = HypercubeManifest::read(manifest_path)?;
    let data_path = manifest.resolve_data_path(manifest_path);
    let meta = fs::metadata(&data_path).map_err(|e| Error::io(&data_path, e))?;
    manifest.check_data_len(meta.len())?;
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;

    let time_bin_ps = manifest.time_bin_ps.unwrap_or_else(|| {
        log::warn!(
            "{}: time_bin_ps missing, assuming {DEFAULT_TIME_BIN_PS} ps",
            manifest_path.display()
        );
        DEFAULT_TIME_BIN_PS
    });
    let axes = CubeAxes {
        wavelength_start_nm: manifest.wavelength_start_nm,
        wavelength_step_nm: manifest.wavelength_step_nm,
        time_bin_ps,
    };
    let dims = [manifest.width, manifest.height, manifest.spectral_bins, manifest.time_bins];
    match manifest.dtype {
        SampleType::U16 => {
            let counts = bytes.chunks_exact(2).map(|b| u16::from_le_bytes([b[0], b[1]])).collect();
            Hypercube::from_u16(dims, axes, counts)
        }
        SampleType::F32 => {
            let counts = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            Hypercube::from_f32(dims, axes, counts)
        }
    }
}

/// Writes `cube` as `<stem>.json` + `<stem>.raw` into `dir`; returns the manifest path.
pub fn save_hypercube(cube: &Hypercube, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data_name = format!("{stem}.raw");
    let data_path = dir.join(&data_name);
    let bytes: Vec<u8> = match &cube.counts {
        Counts::U16(v) => v.iter().flat_map(|c| c.to_le_bytes()).collect(),
        Counts::F32(v) => v.iter().flat_map(|c| c.to_le_bytes()).collect(),
    };
    fs::write(&data_path, bytes).map_err(|e| Error::io(&data_path, e))?;
    let manifest_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&cube.manifest(data_name))?;
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_manifest(dir: &Path, dims: [usize; 4], dtype: &str, time_bin: Option<f64>) -> PathBuf {
        let mut m = serde_json::json!({
            "width": dims[0], "height": dims[1], "spectral_bins": dims[2], "time_bins": dims[3],
            "wavelength_start_nm": 500.0, "wavelength_step_nm": 0.546875,
            "dtype": dtype, "layout": LAYOUT_XYST, "data_file": "cube.raw"
        });
        if let Some(tb) = time_bin {
            m["time_bin_ps"] = tb.into();
        }
        let p = dir.join("cube.json");
        fs::write(&p, m.to_string()).unwrap();
        p
    }

    #[test]
    fn minimal_cube_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), [2, 2, 1, 4], "u16", Some(250.0));
        let data: Vec<u8> = (0u16..16).flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.path().join("cube.raw"), data).unwrap();
        let cube = load_hypercube(&p).unwrap();
        assert_eq!(cube.dims(), [2, 2, 1, 4]);
        assert_eq!(cube.time_bin_ps(), 250.0);
        // t fastest, then s, then y, then x
        assert_eq!(cube.get(0, 1, 0, 2), 6.0);
        assert_eq!(cube.get(1, 0, 0, 3), 11.0);
    }

    #[test]
    fn short_data_file_is_a_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), [4, 4, 2, 8], "u16", None);
        fs::write(dir.path().join("cube.raw"), vec![0u8; 200]).unwrap();
        assert!(matches!(load_hypercube(&p), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn missing_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_hypercube(&dir.path().join("nope.json")), Err(Error::MissingFile(_))));
        let p = write_manifest(dir.path(), [1, 1, 1, 4], "u16", None);
        assert!(matches!(load_hypercube(&p), Err(Error::MissingFile(_))));
    }

    #[test]
    fn missing_time_bin_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), [1, 1, 1, 4], "f32", None);
        fs::write(dir.path().join("cube.raw"), vec![0u8; 16]).unwrap();
        assert_eq!(load_hypercube(&p).unwrap().time_bin_ps(), DEFAULT_TIME_BIN_PS);
    }

    #[test]
    fn negative_f32_count_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), [1, 1, 1, 4], "f32", Some(50.0));
        let data: Vec<u8> = [1.0f32, 2.0, -0.5, 0.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.path().join("cube.raw"), data).unwrap();
        assert!(matches!(load_hypercube(&p), Err(Error::NegativeCount { index: 2 })));
    }

    #[test]
    fn full_size_acquisition_manifest_validates() {
        // 256x256 pixels, 512 bands, 32 time channels of u16; only the file
        // length is inspected, so a sparse file is enough.
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), [256, 256, 512, 32], "u16", None);
        let m = HypercubeManifest::read(&p).unwrap();
        assert_eq!(m.element_count(), 256 * 256 * 512 * 32);
        let raw = fs::File::create(dir.path().join("cube.raw")).unwrap();
        raw.set_len(m.byte_len()).unwrap();
        let len = fs::metadata(dir.path().join("cube.raw")).unwrap().len();
        m.check_data_len(len).unwrap();
        assert!(m.check_data_len(len - 2).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let counts: Vec<f32> = (0..3 * 2 * 2 * 5).map(|i| i as f32 * 0.5).collect();
        let cube = Hypercube::from_f32([3, 2, 2, 5], CubeAxes::default(), counts).unwrap();
        let p = save_hypercube(&cube, dir.path(), "tile").unwrap();
        assert_eq!(load_hypercube(&p).unwrap(), cube);
    }
}
