use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stitching::TilePlacement;

pub const PROJECT_FILE: &str = "project.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WsiRef {
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypercubeRef {
    pub tile_id: String,
    pub manifest: PathBuf,
}

/// Persistent state of one co-registration project.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectSession {
    #[serde(default)]
    pub wsi: Option<WsiRef>,
    #[serde(default)]
    pub hypercubes: Vec<HypercubeRef>,
    #[serde(default)]
    pub placements: Vec<TilePlacement>,
    /// Ids of the registration results whose placements were accepted.
    #[serde(default)]
    pub accepted_registrations: Vec<String>,
}

impl ProjectSession {
    pub fn validate(&self) -> Result<()> {
        for p in &self.placements {
            if !self.hypercubes.iter().any(|h| h.tile_id == p.tile_id) {
                return Err(Error::InvalidProject(format!("placement references unknown tile `{}`", p.tile_id)));
            }
            if let Some(wsi) = &self.wsi {
                p.patch.validate_within(wsi.width, wsi.height)?;
            }
        }
        Ok(())
    }

    pub fn hypercube(&self, tile_id: &str) -> Option<&HypercubeRef> {
        self.hypercubes.iter().find(|h| h.tile_id == tile_id)
    }

    /// Adds a placement under `registration_id`, replacing any earlier
    /// placement of the same tile; a repeated id is a no-op.
    /// Returns whether the session changed.
    pub fn accept(&mut self, registration_id: &str, placement: TilePlacement) -> Result<bool> {
        if self.accepted_registrations.iter().any(|r| r == registration_id) {
            return Ok(false);
        }
        let mut next = self.clone();
        next.placements.retain(|p| p.tile_id != placement.tile_id);
        next.placements.push(placement);
        next.accepted_registrations.push(registration_id.to_string());
        next.validate()?;
        *self = next;
        Ok(true)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let session: Self = serde_json::from_str(&text)?;
        Ok(session)
    }

    /// Write-temp-then-rename: a crash at any point leaves either the old or
    /// the new file in place, never a torn one.
    pub fn save_atomic(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(PROJECT_FILE);
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let json = serde_json::to_vec_pretty(self)?;
        {
            let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            f.write_all(&json).map_err(|e| Error::io(&tmp, e))?;
            f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
        if let Ok(d) = fs::File::open(dir) {
            // Directory fsync is best-effort; not every platform supports it.
            let _ = d.sync_all();
        }
        Ok(())
    }
}
