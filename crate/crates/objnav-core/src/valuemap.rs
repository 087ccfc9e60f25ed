//! Semantic value map: advisor action scores projected into 2D with a
//! viewing-uncertainty cone, fused over time by confidence-weighted
//! averaging, and used to prioritize frontiers.

use alloc::vec::Vec;

use crate::advisor::ActionScores;
use crate::frontier::Frontier;
use crate::grid::Cell;
use crate::mapper::{Belief, ObstacleMap};
use crate::math;
use crate::world::Pose;

/// Parameters of the viewing-uncertainty model.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ConfidenceParams {
    /// Distance decay factor, 1/meters.
    pub lambda_per_m: f64,
    /// Horizontal field of view backing the angular falloff, degrees.
    pub theta_fov_deg: f64,
}

impl Default for ConfidenceParams {
    fn default() -> Self {
        Self {
            lambda_per_m: 0.1,
            theta_fov_deg: 79.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfidenceError {
    #[error("angle {theta_deg} deg outside the half-fov {half_fov_deg} deg")]
    OutsideFov { theta_deg: f64, half_fov_deg: f64 },
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
}

/// Viewing confidence for a point at distance `d` and angle `theta` off the
/// optical axis: `exp(-lambda d) * cos^2( theta / (theta_fov / 2) * pi/2 )`.
pub fn confidence(d_m: f64, theta_deg: f64, p: &ConfidenceParams) -> Result<f64, ConfidenceError> {
    if d_m < 0.0 {
        return Err(ConfidenceError::NegativeDistance(d_m));
    }
    let half_fov = p.theta_fov_deg / 2.0;
    if math::abs(theta_deg) > half_fov {
        return Err(ConfidenceError::OutsideFov {
            theta_deg,
            half_fov_deg: half_fov,
        });
    }
    let angular = math::cos(theta_deg / half_fov * core::f64::consts::FRAC_PI_2);
    Ok(math::exp(-p.lambda_per_m * d_m) * angular * angular)
}

/// Confidence-weighted fusion of one cell (symmetric in its two inputs).
///
/// Returns `(value, confidence)`. When both confidences are zero the cell
/// stays at `neutral` with zero confidence.
pub fn fuse_cell(prev: (f64, f64), curr: (f64, f64), neutral: f64) -> (f64, f64) {
    let (v_prev, c_prev) = prev;
    let (v_curr, c_curr) = curr;
    let denom = c_curr + c_prev;
    if denom <= 0.0 {
        return (neutral, 0.0);
    }
    (
        (c_curr * v_curr + c_prev * v_prev) / denom,
        (c_curr * c_curr + c_prev * c_prev) / denom,
    )
}

/// Aligned value and confidence rasters.
#[derive(Clone, Debug)]
pub struct ValueMap {
    width: usize,
    height: usize,
    resolution: f64,
    neutral: f64,
    value: Vec<f64>,
    conf: Vec<f64>,
}

impl ValueMap {
    pub fn new(width: usize, height: usize, resolution: f64, neutral: f64) -> Self {
        Self {
            width,
            height,
            resolution,
            neutral,
            value: alloc::vec![neutral; width * height],
            conf: alloc::vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn neutral(&self) -> f64 {
        self.neutral
    }

    fn idx(&self, c: Cell) -> Option<usize> {
        (c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height)
            .then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn value(&self, c: Cell) -> f64 {
        self.idx(c).map(|i| self.value[i]).unwrap_or(self.neutral)
    }

    pub fn confidence(&self, c: Cell) -> f64 {
        self.idx(c).map(|i| self.conf[i]).unwrap_or(0.0)
    }

    /// Overwrite one cell's value and confidence.
    pub fn set(&mut self, c: Cell, v: f64, conf: f64) {
        if let Some(i) = self.idx(c) {
            self.value[i] = v;
            self.conf[i] = conf;
        }
    }

    /// Fuse one projected frame into the running map, cell by cell.
    pub fn fuse_frame(&mut self, frame: &ValueMap) {
        debug_assert_eq!((self.width, self.height), (frame.width, frame.height));
        for i in 0..self.value.len() {
            let (v, c) = fuse_cell(
                (self.value[i], self.conf[i]),
                (frame.value[i], frame.conf[i]),
                self.neutral,
            );
            self.value[i] = v;
            self.conf[i] = c;
        }
    }
}

/// Which of the four 90-degree heading sectors a relative bearing falls in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sector {
    Forward,
    Left,
    Backward,
    Right,
}

/// Sector of a bearing relative to the agent heading, with half-open
/// boundaries rotating counter-clockwise: forward is `[-45, 45)`.
pub fn sector_of(relative_deg: f64) -> Sector {
    if (-45.0..45.0).contains(&relative_deg) {
        Sector::Forward
    } else if (45.0..135.0).contains(&relative_deg) {
        Sector::Left
    } else if !(-135.0..135.0).contains(&relative_deg) {
        Sector::Backward
    } else {
        Sector::Right
    }
}

fn sector_axis_deg(s: Sector) -> f64 {
    match s {
        Sector::Forward => 0.0,
        Sector::Left => 90.0,
        Sector::Backward => 180.0,
        Sector::Right => -90.0,
    }
}

/// Project one frame of action scores around the agent.
///
/// Every non-occupied cell within `radius` is assigned to one of four
/// 90-degree sectors in the agent frame; its frame value is that sector's
/// action score and its frame confidence comes from the viewing-uncertainty
/// model with the in-sector offset rescaled onto the `[-fov/2, fov/2]`
/// domain. Cells outside the radius keep zero confidence.
pub fn project_scores(
    pose: &Pose,
    scores: &ActionScores,
    map: &ObstacleMap,
    p: &ConfidenceParams,
    radius_m: f64,
) -> ValueMap {
    let mut frame = ValueMap::new(map.width(), map.height(), map.resolution(), 0.5);
    let res = map.resolution();
    let r_cells = (radius_m / res) as i32 + 1;
    let center = pose.cell(res);
    for dy in -r_cells..=r_cells {
        for dx in -r_cells..=r_cells {
            let c = center.offset(dx, dy);
            if !map.in_bounds(c) || map.belief(c) == Belief::Occupied {
                continue;
            }
            let (cx, cy) = c.center(res);
            let (ox, oy) = (cx - pose.x, cy - pose.y);
            let d = math::hypot(ox, oy);
            if d > radius_m {
                continue;
            }
            let (sector, theta_sector) = if d < 1e-12 {
                (Sector::Forward, 0.0)
            } else {
                let rel = math::angle_delta_deg(pose.heading_deg, math::atan2(oy, ox).to_degrees());
                let sector = sector_of(rel);
                (
                    sector,
                    math::angle_delta_deg(sector_axis_deg(sector), rel),
                )
            };
            let theta = theta_sector / 45.0 * (p.theta_fov_deg / 2.0);
            let conf = confidence(d, theta, p).unwrap_or(0.0);
            let value = match sector {
                Sector::Forward => scores.forward,
                Sector::Left => scores.left,
                Sector::Backward => scores.backward,
                Sector::Right => scores.right,
            };
            frame.set(c, value, conf);
        }
    }
    frame
}

/// The frontier whose midpoint carries the highest value; ties break by
/// distance to the pose, then row-major midpoint order.
pub fn select_frontier<'a>(
    frontiers: &'a [Frontier],
    vm: &ValueMap,
    pose: &Pose,
) -> Option<&'a Frontier> {
    rank_frontiers(frontiers, vm, pose).into_iter().next()
}

/// All frontiers in selection order (best first).
pub fn rank_frontiers<'a>(
    frontiers: &'a [Frontier],
    vm: &ValueMap,
    pose: &Pose,
) -> Vec<&'a Frontier> {
    let mut ranked: Vec<&Frontier> = frontiers.iter().collect();
    let dist2 = |f: &Frontier| {
        let (x, y) = f.midpoint.center(vm.resolution);
        let (dx, dy) = (x - pose.x, y - pose.y);
        dx * dx + dy * dy
    };
    ranked.sort_by(|a, b| {
        vm.value(b.midpoint)
            .partial_cmp(&vm.value(a.midpoint))
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| {
                dist2(a)
                    .partial_cmp(&dist2(b))
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .then_with(|| a.midpoint.row_major().cmp(&b.midpoint.row_major()))
    });
    ranked
}
