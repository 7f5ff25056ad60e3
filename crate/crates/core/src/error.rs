use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Variants carry enough context to be rendered as a user-facing message;
/// [`Error::code`] gives a stable machine-readable identifier.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative or non-finite photon count at element {index}")]
    NegativeCount { index: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("smoothing window {window} outside 1..={bins}")]
    WindowTooLarge { window: usize, bins: usize },
    #[error("insufficient signal: {total} counts (need at least {min})")]
    InsufficientSignal { total: f64, min: f64 },
    #[error("spectral band {band} out of range (cube has {bins} bands)")]
    BandOutOfRange { band: usize, bins: usize },
    #[error("plane has no nonzero intensity pixels")]
    EmptyPlane,
    #[error("normalisation group is empty")]
    EmptyGroup,

    #[error("histogram is degenerate (constant image)")]
    DegenerateHistogram,
    #[error("intensity weighting requested but no intensity plane supplied")]
    MissingIntensity,

    #[error("no external image for tile `{0}`")]
    MissingExternalImage(String),
    #[error("image has no foreground pixels")]
    EmptyForeground,

    #[error("homography is singular (|det| = {0:e})")]
    SingularHomography(f64),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("images have no mutual foreground")]
    EmptyOverlap,
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("canvas too small: {0}")]
    CanvasTooSmall(String),
    #[error("tile images must all be of the same kind")]
    KindMismatch,
    #[error("point ({x}, {y}) is not covered by any placement")]
    PointNotCovered { x: f64, y: f64 },
    #[error("probe window must be odd, got {0}")]
    InvalidWindow(usize),
    #[error("rectangle {0} lies outside the slide")]
    RectOutOfBounds(String),
    #[error("project is inconsistent: {0}")]
    InvalidProject(String),

    #[error("image codec failure: {0}")]
    Image(#[from] image::ImageError),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { field, message: message.into() }
    }

    /// Stable identifier used in CLI JSON output and service error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "MissingFile",
            Error::Io { .. } => "IoFailure",
            Error::CorruptHeader(_) => "CorruptHeader",
            Error::InvalidManifest(_) => "InvalidManifest",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NegativeCount { .. } => "NegativeCount",
            Error::InvalidValue(_) => "InvalidValue",
            Error::WindowTooLarge { .. } => "WindowTooLarge",
            Error::InsufficientSignal { .. } => "InsufficientSignal",
            Error::BandOutOfRange { .. } => "BandOutOfRange",
            Error::EmptyPlane => "EmptyPlane",
            Error::EmptyGroup => "EmptyGroup",
            Error::DegenerateHistogram => "DegenerateHistogram",
            Error::MissingIntensity => "MissingIntensity",
            Error::MissingExternalImage(_) => "MissingExternalImage",
            Error::EmptyForeground => "EmptyForeground",
            Error::SingularHomography(_) => "SingularHomography",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
            Error::EmptyOverlap => "EmptyOverlap",
            Error::InvalidParameter { .. } => "ValidationError",
            Error::CanvasTooSmall(_) => "CanvasTooSmall",
            Error::KindMismatch => "KindMismatch",
            Error::PointNotCovered { .. } => "PointNotCovered",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::RectOutOfBounds(_) => "RectOutOfBounds",
            Error::InvalidProject(_) => "InvalidProject",
            Error::Image(_) => "ImageCodec",
            Error::Json(_) => "Json",
        }
    }
}
