//! Simulation harness around `objnav-core`: run configuration, scenario
//! manifests and episode records, seeded map generation, the remote advisor
//! transport, and raster snapshot export.

pub mod batch;
pub mod config;
pub mod mazegen;
pub mod remote;
pub mod snapshot;

pub use batch::{load_manifest, run_batch, BatchOutcome, EpisodeRecord, LoadedEpisode};
pub use config::{RemoteConfig, RunConfig};
pub use mazegen::{rooms_scenario, twin_scenario, write_scenario_set, RoomsParams, Scenario};
pub use remote::RemoteAdvisor;
