//! Raster snapshot export: belief and value-map layers as binary PGM files.

use std::path::{Path, PathBuf};

use anyhow::Result;
use objnav_core::mapper::ObstacleMap;
use objnav_core::pgm;
use objnav_core::runner::{StepObserver, StepSnapshot};
use objnav_core::valuemap::ValueMap;

pub fn write_layers(dir: &Path, stem: &str, map: &ObstacleMap, vm: &ValueMap) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}_obstacle.pgm")), pgm::obstacle_map_pgm(map))?;
    std::fs::write(dir.join(format!("{stem}_value.pgm")), pgm::value_layer_pgm(vm))?;
    std::fs::write(
        dir.join(format!("{stem}_confidence.pgm")),
        pgm::confidence_layer_pgm(vm),
    )?;
    Ok(())
}

/// Observer that dumps the three layers every `every` steps (and can be
/// asked for a final dump by the caller).
pub struct SnapshotObserver {
    dir: PathBuf,
    every: u32,
    pub error: Option<anyhow::Error>,
}

impl SnapshotObserver {
    pub fn new(dir: PathBuf, every: u32) -> Self {
        Self {
            dir,
            every: every.max(1),
            error: None,
        }
    }
}

impl StepObserver for SnapshotObserver {
    fn on_step(&mut self, snapshot: &StepSnapshot<'_>) {
        if self.error.is_some() || snapshot.step % self.every != 0 {
            return;
        }
        let stem = format!("step_{:04}", snapshot.step);
        if let Err(e) = write_layers(&self.dir, &stem, snapshot.obstacle_map, snapshot.value_map) {
            self.error = Some(e);
        }
    }
}
