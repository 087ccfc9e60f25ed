//! Deterministic 2D grid-world object-goal navigation.
//!
//! An agent is dropped into an unseen occupancy-grid world and has to find an
//! object of a named category using a discrete action set (0.25 m forward
//! steps, 30 degree turns, stop). The pipeline mirrors a frontier-based
//! exploration stack:
//!
//! * [`world`] — ground-truth map, agent kinematics, raycast depth sensing.
//! * [`mapper`] — the agent's evolving unknown/free/occupied belief grid.
//! * [`frontier`] — boundaries between explored free space and unknown space,
//!   with midpoint waypoints.
//! * [`valuemap`] — semantic value and confidence rasters built by projecting
//!   advisor action scores with a viewing-uncertainty cone and fusing frames
//!   with confidence-weighted averaging.
//! * [`advisor`] — the pluggable semantic-guidance boundary (prompt rendering,
//!   structured score parsing, oracle and random implementations).
//! * [`history`] — recent-action ring buffer, oscillation detection, and the
//!   non-turn fallback action.
//! * [`planner`] — A* point navigation on the belief grid.
//! * [`goalnav`] — simulated detection, verification, clustered supplementary
//!   waypoints, and the guided final approach.
//! * [`runner`] — the three-phase episode protocol plus SR/SPL metrics.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion `objnav-sim`
//! crate carries file formats, the CLI, and the remote advisor transport.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod advisor;
pub mod frontier;
pub mod goalnav;
pub mod grid;
pub mod history;
pub mod mapfile;
pub mod mapper;
mod math;
pub mod pgm;
pub mod planner;
pub mod runner;
#[cfg(test)]
mod testutil;
pub mod valuemap;
pub mod world;

pub use advisor::{ActionScores, Advisor, AdvisorEnv, AdvisorKind, AdvisorRequest};
pub use frontier::Frontier;
pub use grid::Cell;
pub use mapper::ObstacleMap;
pub use runner::{EpisodeResult, EpisodeSpec, NavConfig, Termination};
pub use valuemap::{ConfidenceParams, ValueMap};
pub use world::{Action, GridWorld, Pose, SensorConfig};
