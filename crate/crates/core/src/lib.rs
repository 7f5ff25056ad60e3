//! Engine for co-registering fluorescence-lifetime tiles to whole-slide
//! histology: hypercube reconstruction, false-histology preparation,
//! photometric homography regression and mosaic stitching.

pub mod datamodel;
pub mod error;
pub mod imaging;
pub mod par;
pub mod pipeline;
pub mod reconstruction;
pub mod registration;
pub mod stitching;
pub mod translation;

pub use error::{Error, Result};
