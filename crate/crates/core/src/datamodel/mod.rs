//! Core data types and their on-disk formats.

mod hypercube;
mod plane;
mod session;

pub use hypercube::{
    load_hypercube, save_hypercube, CubeAxes, Hypercube, HypercubeManifest, SampleType,
    DEFAULT_TIME_BIN_PS, LAYOUT_XYST,
};
pub use plane::{
    decode_plane, encode_plane, encode_png, load_plane, load_rgb, save_plane, save_rgb, BinaryMask, PlaneKind, ScalarPlane,
    PLANE_MAGIC,
};
pub use session::{HypercubeRef, ProjectSession, WsiRef, PROJECT_FILE};

/// 3-channel 8-bit image.
pub type RgbImage = image::RgbImage;
