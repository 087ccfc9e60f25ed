//! Final-approach phase: simulated detection, advisor verification,
//! clustered supplementary waypoints over high-value cells, and the guided
//! approach that works through them by planned cost.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::advisor::{Advisor, AdvisorEnv, AdvisorError, VerifyQuery};
use crate::grid::{cell_at, Cell};
use crate::mapper::{Belief, ObstacleMap};
use crate::math;
use crate::planner::{next_action, plan_path, PathPlan, PlannerConfig};
use crate::valuemap::ValueMap;
use crate::world::{visible_object_cells, Action, GridWorld, Pose, SensorConfig};

/// Detector noise model. With `sigma` zero the simulated confidence is the
/// deterministic `base - alpha * distance`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectorConfig {
    pub base: f64,
    pub alpha_per_m: f64,
    pub sigma: f64,
    pub false_positive_rate: f64,
    /// Detections at or below this confidence never enter the goal phase.
    pub threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            base: 1.0,
            alpha_per_m: 0.08,
            sigma: 0.05,
            false_positive_rate: 0.0,
            threshold: 0.8,
        }
    }
}

/// Goal-phase tuning.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GoalConfig {
    /// Number of supplementary waypoints to cluster.
    pub waypoint_count: usize,
    /// Candidate cells must lie within this distance of the detection, meters.
    pub margin_m: f64,
    /// Candidate cells must carry a value strictly above this.
    pub value_threshold: f64,
}

impl Default for GoalConfig {
    fn default() -> Self {
        Self {
            waypoint_count: 3,
            margin_m: 1.0,
            value_threshold: 0.8,
        }
    }
}

/// One simulated detection event.
#[derive(Clone, Debug)]
pub struct Detection {
    pub category: String,
    /// Visible footprint cells backing the detection (never empty).
    pub cells: Vec<Cell>,
    pub confidence: f64,
    /// Distance to the nearest visible cell, meters.
    pub distance_m: f64,
    /// Injected false positive (noise-model artifact).
    pub spurious: bool,
}

/// Supplementary waypoints for the final approach.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalWaypoints {
    pub centers: Vec<Cell>,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; plenty for detector noise
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    math::sqrt(-2.0 * libm_ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

#[cfg(feature = "std")]
fn libm_ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(not(feature = "std"))]
fn libm_ln(x: f64) -> f64 {
    libm::log(x)
}

/// Simulate the object detector from ground-truth visibility.
///
/// A visible target yields a detection with confidence
/// `clamp(base - alpha * distance + noise, 0, 1)`. With no visible target, a
/// false positive may be injected at the configured rate, fabricated ahead of
/// the agent and flagged `spurious`.
pub fn simulate_detection(
    world: &GridWorld,
    pose: &Pose,
    target: &str,
    det: &DetectorConfig,
    sensor: &SensorConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Detection> {
    let visible = visible_object_cells(world, pose, target, sensor);
    if !visible.is_empty() {
        let distance = visible
            .iter()
            .map(|v| v.distance_m)
            .fold(f64::INFINITY, f64::min);
        let noise = if det.sigma > 0.0 {
            det.sigma * gaussian(rng)
        } else {
            0.0
        };
        return Some(Detection {
            category: target.to_string(),
            cells: visible.iter().map(|v| v.cell).collect(),
            confidence: (det.base - det.alpha_per_m * distance + noise).clamp(0.0, 1.0),
            distance_m: distance,
            spurious: false,
        });
    }
    if det.false_positive_rate > 0.0 && rng.gen_range(0.0..1.0) < det.false_positive_rate {
        // fabricate a sighting about a meter ahead
        let rad = pose.heading_deg.to_radians();
        let d = 1.0f64.min(sensor.max_range_m);
        let spot = (pose.x + d * math::cos(rad), pose.y + d * math::sin(rad));
        let cell = cell_at(spot.0, spot.1, world.resolution());
        let cell = if world.is_blocked(cell) {
            pose.cell(world.resolution())
        } else {
            cell
        };
        let (cx, cy) = cell.center(world.resolution());
        let distance = math::hypot(cx - pose.x, cy - pose.y);
        let noise = if det.sigma > 0.0 {
            det.sigma * gaussian(rng)
        } else {
            0.0
        };
        return Some(Detection {
            category: target.to_string(),
            cells: alloc::vec![cell],
            confidence: (det.base - det.alpha_per_m * distance + noise).clamp(0.0, 1.0),
            distance_m: distance,
            spurious: true,
        });
    }
    None
}

/// Ask the advisor to confirm a detection. Errors propagate so the caller
/// can fail closed and keep exploring.
pub fn verify_detection(
    advisor: &mut dyn Advisor,
    det: &Detection,
    target: &str,
    env: &AdvisorEnv<'_>,
) -> Result<bool, AdvisorError> {
    let query = VerifyQuery {
        detected_category: det.category.clone(),
        distance_m: det.distance_m,
        spurious: det.spurious,
    };
    advisor.verify(target, &query, env)
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy
}

/// Cluster high-value cells near a detection into supplementary waypoints.
///
/// Candidates are non-occupied cells within `margin_m` of the detection whose
/// value exceeds the threshold. Lloyd iterations from deterministic
/// farthest-point seeds produce `waypoint_count` centers, snapped to the
/// nearest non-occupied cell. Fewer candidates than centers yield one
/// waypoint per candidate; no candidates fall back to the free cell nearest
/// the detection centroid.
pub fn goal_waypoints(
    vm: &ValueMap,
    det: &Detection,
    map: &ObstacleMap,
    cfg: &GoalConfig,
) -> GoalWaypoints {
    let res = map.resolution();
    let det_centers: Vec<(f64, f64)> = det.cells.iter().map(|c| c.center(res)).collect();
    let margin2 = cfg.margin_m * cfg.margin_m;

    let mut candidates: Vec<Cell> = Vec::new();
    for (c, belief) in map.iter_cells() {
        if belief == Belief::Occupied {
            continue;
        }
        if vm.value(c) <= cfg.value_threshold {
            continue;
        }
        let p = c.center(res);
        if det_centers.iter().any(|d| dist2(p, *d) <= margin2) {
            candidates.push(c);
        }
    }

    if candidates.is_empty() {
        let n = det.cells.len() as f64;
        let centroid = det_centers
            .iter()
            .fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
        return GoalWaypoints {
            centers: alloc::vec![nearest_cell(map, centroid, true)
                .or_else(|| nearest_cell(map, centroid, false))
                .unwrap_or_else(|| cell_at(centroid.0, centroid.1, res))],
        };
    }
    if candidates.len() <= cfg.waypoint_count {
        return GoalWaypoints {
            centers: candidates,
        };
    }

    let k = cfg.waypoint_count.max(1);
    let points: Vec<(f64, f64)> = candidates.iter().map(|c| c.center(res)).collect();

    // farthest-point seeding from the row-major-first candidate
    let mut seeds: Vec<usize> = alloc::vec![0];
    while seeds.len() < k {
        let far = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = seeds
                    .iter()
                    .map(|s| dist2(*p, points[*s]))
                    .fold(f64::INFINITY, f64::min);
                (i, d)
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap();
        seeds.push(far);
    }
    let mut centers: Vec<(f64, f64)> = seeds.iter().map(|s| points[*s]).collect();

    let mut assignment = alloc::vec![0usize; points.len()];
    for _ in 0..32 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|a, b| {
                    dist2(*p, centers[*a])
                        .partial_cmp(&dist2(*p, centers[*b]))
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap();
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        for (ci, center) in centers.iter_mut().enumerate() {
            let members: Vec<&(f64, f64)> = points
                .iter()
                .zip(&assignment)
                .filter(|(_, a)| **a == ci)
                .map(|(p, _)| p)
                .collect();
            if !members.is_empty() {
                let n = members.len() as f64;
                *center = members
                    .iter()
                    .fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
            }
        }
        if !changed {
            break;
        }
    }

    let mut out: Vec<Cell> = Vec::new();
    for center in centers {
        if let Some(cell) = nearest_cell(map, center, false) {
            if !out.contains(&cell) {
                out.push(cell);
            }
        }
    }
    GoalWaypoints { centers: out }
}

/// Nearest cell to a metric point; `free_only` restricts to known-free,
/// otherwise any non-occupied cell qualifies. Row-major tie-break.
fn nearest_cell(map: &ObstacleMap, p: (f64, f64), free_only: bool) -> Option<Cell> {
    let res = map.resolution();
    let mut best: Option<(f64, Cell)> = None;
    for (c, belief) in map.iter_cells() {
        let ok = if free_only {
            belief == Belief::Free
        } else {
            belief != Belief::Occupied
        };
        if !ok {
            continue;
        }
        let d = dist2(c.center(res), p);
        let better = match best {
            None => true,
            Some((bd, bc)) => d < bd || (d == bd && c.row_major() < bc.row_major()),
        };
        if better {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c)
}

/// Works through supplementary waypoints in order of increasing planned
/// cost, replanning as the belief map evolves.
pub struct GoalApproach {
    queue: Vec<Cell>,
    plan: Option<PathPlan>,
    plan_age: u32,
}

impl GoalApproach {
    /// Order waypoints by planned cost from the current cell; unreachable
    /// ones go to the back, to be retried as the map improves.
    pub fn new(waypoints: &GoalWaypoints, map: &ObstacleMap, pose: &Pose, cfg: &PlannerConfig) -> Self {
        let start = pose.cell(map.resolution());
        let mut costed: Vec<(Option<f64>, Cell)> = waypoints
            .centers
            .iter()
            .map(|w| {
                let cost = plan_path(map, start, *w, cfg.unknown_penalty)
                    .ok()
                    .map(|p| p.cost_m);
                (cost, *w)
            })
            .collect();
        costed.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => core::cmp::Ordering::Less,
            (None, Some(_)) => core::cmp::Ordering::Greater,
            (None, None) => core::cmp::Ordering::Equal,
        });
        Self {
            queue: costed.into_iter().map(|(_, w)| w).collect(),
            plan: None,
            plan_age: 0,
        }
    }

    /// Next action toward the cheapest remaining waypoint, or `None` once
    /// every waypoint is exhausted (the caller returns to exploration).
    pub fn step(&mut self, map: &ObstacleMap, pose: &Pose, cfg: &PlannerConfig) -> Option<Action> {
        let start = pose.cell(map.resolution());
        loop {
            let target = *self.queue.first()?;
            if start == target {
                // reached without the stop condition holding: try the next one
                self.queue.remove(0);
                self.plan = None;
                continue;
            }
            let need_replan = match &self.plan {
                None => true,
                Some(plan) => {
                    plan.goal() != target
                        || self.plan_age >= cfg.replan_interval
                        || plan.next_cell_occupied(map, pose)
                }
            };
            if need_replan {
                match plan_path(map, start, target, cfg.unknown_penalty) {
                    Ok(plan) => {
                        self.plan = Some(plan);
                        self.plan_age = 0;
                    }
                    Err(_) => {
                        self.queue.remove(0);
                        self.plan = None;
                        continue;
                    }
                }
            }
            self.plan_age += 1;
            return Some(next_action(
                self.plan.as_ref().unwrap(),
                map,
                pose,
                false,
            ));
        }
    }
}
