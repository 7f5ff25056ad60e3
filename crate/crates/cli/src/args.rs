use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use flimreg_core::imaging::{Colormap, Weighting};
use flimreg_core::registration::{ColorMode, Optimizer, RegressionParams};
use flimreg_core::stitching::{PatchRect, DEFAULT_BAND_RANGE, DEFAULT_PROBE_WINDOW};
use flimreg_core::translation::TranslatorConfig;
use serde::de::DeserializeOwned;

#[derive(Debug, Parser)]
#[command(name = "flimreg", version, about = "FLIM-to-histology co-registration workbench")]
pub struct Cli {
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct intensity and lifetime planes from a hypercube.
    Reconstruct(ReconstructArgs),
    /// Blank the background of a histology image (Otsu on the equalised inverted gray).
    MaskBg(MaskBgArgs),
    /// Colour-render a lifetime plane.
    Render(RenderArgs),
    /// Turn a lifetime render into false histology.
    Translate(TranslateArgs),
    /// Estimate the homography between a tile and a slide patch.
    Register(RegisterArgs),
    /// Composite accepted placements into a lifetime mosaic.
    Stitch(StitchArgs),
    /// Spectral lifetime curve at a slide point.
    Probe(ProbeArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Create and edit project files.
    #[command(subcommand)]
    Project(ProjectCommand),
}

/// Parses a bare word with the type's serde names (`gray`, `intensity`, ...).
fn serde_word<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `min,max`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

fn parse_patch(s: &str) -> Result<PatchRect, String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, w, h] => Ok(PatchRect::new(x, y, w, h)),
        _ => Err(format!("expected `x,y,w,h`, got `{s}`")),
    }
}

fn parse_translator(s: &str) -> Result<TranslatorConfig, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct BandSelect {
    /// Band index.
    #[arg(long)]
    pub band: Option<usize>,
    /// Band nearest this wavelength (nm); 527 when nothing is given.
    #[arg(long)]
    pub wavelength: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TileArgs {
    /// Spectral moving-average width in bands.
    #[arg(long, default_value_t = flimreg_core::reconstruction::DEFAULT_SMOOTH_WINDOW)]
    pub smooth_window: usize,
    /// Skip the photon-noise filter.
    #[arg(long)]
    pub no_filter: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Hypercube manifest (.json).
    #[arg(long)]
    pub cube: PathBuf,
    #[command(flatten)]
    pub band: BandSelect,
    /// Reconstruct every band.
    #[arg(long, conflicts_with_all = ["band", "wavelength"])]
    pub all_bands: bool,
    #[arg(long, default_value_t = flimreg_core::reconstruction::DEFAULT_SMOOTH_WINDOW)]
    pub smooth_window: usize,
    /// Apply the photon-noise filter.
    #[arg(long)]
    pub filter: bool,
    /// Output directory for `<stem>_b<band>_{intensity,lifetime}.plane`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskBgArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the foreground mask as a black/white PNG.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Lifetime plane.
    #[arg(long)]
    pub lifetime: PathBuf,
    /// Intensity plane for weighting (and for blacking out empty pixels).
    #[arg(long)]
    pub intensity: Option<PathBuf>,
    /// Lifetime display range in ns.
    #[arg(long, value_parser = parse_range, default_value = "1,3")]
    pub range: (f64, f64),
    #[arg(long, value_parser = serde_word::<Weighting>, default_value = "intensity")]
    pub weighting: Weighting,
    #[arg(long, value_parser = serde_word::<Colormap>, default_value = "jet")]
    pub colormap: Colormap,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Lifetime render (PNG).
    #[arg(long)]
    pub input: PathBuf,
    /// `baseline:<reference.png>` or `external:<dir>`.
    #[arg(long, value_parser = parse_translator)]
    pub translator: TranslatorConfig,
    /// Intensity plane; zero-intensity pixels become black.
    #[arg(long)]
    pub intensity: Option<PathBuf>,
    /// Tile id (external translators look up `<id>.png`); defaults to the input stem.
    #[arg(long)]
    pub tile_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RegressionArgs {
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub decay_epoch: usize,
    #[arg(long, default_value_t = 0.1)]
    pub decay_factor: f64,
    /// Side of the central loss window in regression pixels.
    #[arg(long, default_value_t = 200)]
    pub window: usize,
    #[arg(long, default_value_t = 256)]
    pub regression_dim: usize,
    #[arg(long, value_parser = serde_word::<ColorMode>, default_value = "gray")]
    pub color_mode: ColorMode,
    #[arg(long, value_parser = serde_word::<Optimizer>, default_value = "gd")]
    pub optimizer: Optimizer,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RegressionArgs {
    pub fn params(&self) -> RegressionParams {
        RegressionParams {
            epochs: self.epochs,
            lr: self.lr,
            decay_epoch: self.decay_epoch,
            decay_factor: self.decay_factor,
            window: self.window,
            regression_dim: self.regression_dim,
            color_mode: self.color_mode,
            optimizer: self.optimizer,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Moving image (false histology); with --target, registers two images directly.
    #[arg(long, requires = "target", conflicts_with = "project")]
    pub moving: Option<PathBuf>,
    #[arg(long, requires = "moving")]
    pub target: Option<PathBuf>,
    /// Project directory; registers `--tile` against `--patch` of its slide.
    #[arg(long, requires_all = ["tile", "patch", "translator"])]
    pub project: Option<PathBuf>,
    #[arg(long)]
    pub tile: Option<String>,
    /// Slide rectangle `x,y,w,h`.
    #[arg(long, value_parser = parse_patch)]
    pub patch: Option<PatchRect>,
    #[arg(long, value_parser = parse_translator)]
    pub translator: Option<TranslatorConfig>,
    #[command(flatten)]
    pub band: BandSelect,
    #[command(flatten)]
    pub tile_opts: TileArgs,
    #[command(flatten)]
    pub params: RegressionArgs,
    /// Write the result JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the moving image warped into the target frame.
    #[arg(long)]
    pub warped: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StitchArgs {
    #[arg(long)]
    pub project: PathBuf,
    #[command(flatten)]
    pub band: BandSelect,
    #[command(flatten)]
    pub tile_opts: TileArgs,
    /// Lifetime display range in ns.
    #[arg(long, value_parser = parse_range, default_value = "1,3")]
    pub render_range: (f64, f64),
    #[arg(long, value_parser = serde_word::<Weighting>, default_value = "none")]
    pub weighting: Weighting,
    #[arg(long, value_parser = serde_word::<Colormap>, default_value = "jet")]
    pub colormap: Colormap,
    /// Blend the mosaic over the slide (1 = mosaic only).
    #[arg(long)]
    pub blend_alpha: Option<f64>,
    /// Paint uncovered canvas pixels with the slide.
    #[arg(long)]
    pub background: bool,
    /// Canvas pixels per slide pixel.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub project: PathBuf,
    /// Slide x (pixels).
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    /// Slide y (pixels).
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    #[arg(long, default_value_t = DEFAULT_BAND_RANGE.0)]
    pub band_min: f64,
    #[arg(long, default_value_t = DEFAULT_BAND_RANGE.1)]
    pub band_max: f64,
    /// Odd side of the averaging window in slide pixels.
    #[arg(long, default_value_t = DEFAULT_PROBE_WINDOW)]
    pub window: usize,
    #[command(flatten)]
    pub tile_opts: TileArgs,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address (overrides FLIMREG_ADDR).
    #[arg(long)]
    pub addr: Option<SocketAddr>,
    /// Data directory (overrides FLIMREG_DATA).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Job worker threads (overrides FLIMREG_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ProjectCommand {
    /// Create `<dir>/project.json`.
    Init {
        #[arg(long)]
        dir: PathBuf,
        /// Whole-slide histology image.
        #[arg(long)]
        wsi: Option<PathBuf>,
    },
    /// Register a hypercube under a tile id.
    AddTile {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Record a registration result as the tile's placement.
    Accept {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
    /// Print the session.
    Show {
        #[arg(long)]
        dir: PathBuf,
    },
}
