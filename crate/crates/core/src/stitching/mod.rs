//! Whole-slide mosaics and cell probing from accepted tile placements.

mod mosaic;
mod placement;
mod probe;

pub use crate::imaging::blend;
pub use mosaic::{save_mosaic, stitch, Coverage, Mosaic, MosaicSidecar, StitchOptions, TileImage};
pub use placement::{compose_placement, tile_to_slide, PatchRect, TilePlacement};
pub use probe::{
    probe_cell, write_probe_csv, ProbeRow, DEFAULT_BAND_RANGE, DEFAULT_PROBE_WINDOW, PROBE_CSV_HEADER,
};
