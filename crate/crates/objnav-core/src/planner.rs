//! Low-level point navigation: A* on the belief grid plus the next-action
//! controller that tracks a planned path with the discrete action set.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::f64::consts::SQRT_2;

use crate::grid::{Cell, RayWalk};
use crate::mapper::{Belief, ObstacleMap};
use crate::math;
use crate::world::{Action, Pose};

/// Turn when the bearing to the tracked cell deviates more than this
/// (half the turn increment).
pub const TURN_DEADBAND_DEG: f64 = 15.0;

/// Planner tuning.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PlannerConfig {
    /// Cost multiplier for stepping into unknown cells.
    pub unknown_penalty: f64,
    /// Re-plan at least every this many steps.
    pub replan_interval: u32,
    /// Between scheduled replans, abandon the committed frontier only when a
    /// competitor's value beats it by more than this.
    pub reselect_margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            unknown_penalty: 2.0,
            replan_interval: 10,
            reselect_margin: 0.2,
        }
    }
}

/// Step tally of a path, kept as integers so costs compare exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub known_straight: u32,
    pub known_diag: u32,
    pub unknown_straight: u32,
    pub unknown_diag: u32,
}

impl StepCounts {
    /// Metric cost: straight steps cost one resolution, diagonal steps
    /// sqrt(2) resolutions, unknown-entering steps scaled by the penalty.
    pub fn cost_m(&self, resolution: f64, unknown_penalty: f64) -> f64 {
        let straight = self.known_straight as f64 + unknown_penalty * self.unknown_straight as f64;
        let diag = self.known_diag as f64 + unknown_penalty * self.unknown_diag as f64;
        resolution * straight + resolution * SQRT_2 * diag
    }

    pub(crate) fn bump(mut self, diagonal: bool, unknown: bool) -> Self {
        match (diagonal, unknown) {
            (false, false) => self.known_straight += 1,
            (true, false) => self.known_diag += 1,
            (false, true) => self.unknown_straight += 1,
            (true, true) => self.unknown_diag += 1,
        }
        self
    }
}

/// An 8-connected path on the belief map, start cell to goal cell.
#[derive(Clone, Debug)]
pub struct PathPlan {
    pub cells: Vec<Cell>,
    pub counts: StepCounts,
    pub cost_m: f64,
}

impl PathPlan {
    pub fn goal(&self) -> Cell {
        *self.cells.last().expect("plans are never empty")
    }

    /// Whether the cell the tracker is about to steer for has become
    /// occupied; the replan trigger.
    pub fn next_cell_occupied(&self, map: &ObstacleMap, pose: &Pose) -> bool {
        let i = nearest_index(&self.cells, pose, map.resolution());
        self.cells[i..self.cells.len().min(i + 2)]
            .iter()
            .any(|c| map.is_occupied(*c))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("start cell ({0}, {1}) is not known free")]
    InvalidStart(i32, i32),
    #[error("goal cell ({0}, {1}) is occupied or out of bounds")]
    InvalidGoal(i32, i32),
    #[error("no traversable path to the goal")]
    Unreachable,
}

#[derive(PartialEq)]
struct HeapKey {
    f: f64,
    idx: usize,
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.f
            .total_cmp(&other.f)
            .then_with(|| self.idx.cmp(&other.idx))
    }
}

fn octile_h(a: Cell, b: Cell, resolution: f64) -> f64 {
    let dx = (a.x - b.x).unsigned_abs() as f64;
    let dy = (a.y - b.y).unsigned_abs() as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    resolution * ((hi - lo) + SQRT_2 * lo)
}

/// Neighbor expansion shared by the planner and its test oracle: 8-connected,
/// never into occupied cells, and diagonal steps only when both orthogonal
/// neighbors are non-occupied (no corner cutting).
pub(crate) fn expand(map: &ObstacleMap, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    crate::grid::NEIGHBORS_8.iter().filter_map(move |&(dx, dy)| {
        let n = c.offset(dx, dy);
        if !map.in_bounds(n) || map.is_occupied(n) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal
            && (map.is_occupied(c.offset(dx, 0)) || map.is_occupied(c.offset(0, dy)))
        {
            return None;
        }
        Some((n, diagonal))
    })
}

/// Minimal-cost 8-connected path on the belief map. Unknown cells are
/// traversable at the configured penalty; occupied cells never are.
pub fn plan_path(
    map: &ObstacleMap,
    start: Cell,
    goal: Cell,
    unknown_penalty: f64,
) -> Result<PathPlan, PlanError> {
    if map.belief(start) != Belief::Free {
        return Err(PlanError::InvalidStart(start.x, start.y));
    }
    if !map.in_bounds(goal) || map.belief(goal) == Belief::Occupied {
        return Err(PlanError::InvalidGoal(goal.x, goal.y));
    }
    let res = map.resolution();
    let (w, h) = (map.width(), map.height());
    let index = |c: Cell| c.y as usize * w + c.x as usize;

    let mut g: Vec<Option<(f64, StepCounts)>> = alloc::vec![None; w * h];
    let mut parent: Vec<Option<Cell>> = alloc::vec![None; w * h];
    let mut closed = alloc::vec![false; w * h];
    let mut open = BinaryHeap::new();

    g[index(start)] = Some((0.0, StepCounts::default()));
    open.push(Reverse(HeapKey {
        f: octile_h(start, goal, res),
        idx: index(start),
    }));

    while let Some(Reverse(HeapKey { idx, .. })) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let cell = Cell::new((idx % w) as i32, (idx / w) as i32);
        if cell == goal {
            break;
        }
        let (g_here, counts_here) = g[idx].expect("popped node must have a cost");
        for (n, diagonal) in expand(map, cell) {
            let ni = index(n);
            if closed[ni] {
                continue;
            }
            let unknown = map.belief(n) == Belief::Unknown;
            let n_counts = counts_here.bump(diagonal, unknown);
            let n_cost = n_counts.cost_m(res, unknown_penalty);
            debug_assert!(n_cost >= g_here);
            if g[ni].map_or(true, |(best, _)| n_cost < best) {
                g[ni] = Some((n_cost, n_counts));
                parent[ni] = Some(cell);
                open.push(Reverse(HeapKey {
                    f: n_cost + octile_h(n, goal, res),
                    idx: ni,
                }));
            }
        }
    }

    let (cost_m, counts) = g[index(goal)].ok_or(PlanError::Unreachable)?;
    if !closed[index(goal)] {
        return Err(PlanError::Unreachable);
    }
    let mut cells = alloc::vec![goal];
    let mut cur = goal;
    while let Some(p) = parent[index(cur)] {
        cells.push(p);
        cur = p;
    }
    cells.reverse();
    Ok(PathPlan {
        cells,
        counts,
        cost_m,
    })
}

/// Dijkstra cost-to-reach for every cell from `start`, with the planner's
/// exact cost model. Used for ideal-path queries over fully-known maps.
pub(crate) fn cost_field(
    map: &ObstacleMap,
    start: Cell,
    unknown_penalty: f64,
) -> Vec<Option<f64>> {
    let res = map.resolution();
    let (w, h) = (map.width(), map.height());
    let index = |c: Cell| c.y as usize * w + c.x as usize;
    let mut dist: Vec<Option<(f64, StepCounts)>> = alloc::vec![None; w * h];
    let mut closed = alloc::vec![false; w * h];
    let mut open = BinaryHeap::new();
    if map.in_bounds(start) && map.belief(start) != Belief::Occupied {
        dist[index(start)] = Some((0.0, StepCounts::default()));
        open.push(Reverse(HeapKey {
            f: 0.0,
            idx: index(start),
        }));
    }
    while let Some(Reverse(HeapKey { idx, .. })) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let cell = Cell::new((idx % w) as i32, (idx / w) as i32);
        let (_, counts_here) = dist[idx].expect("popped node must have a cost");
        for (n, diagonal) in expand(map, cell) {
            let ni = index(n);
            if closed[ni] {
                continue;
            }
            let unknown = map.belief(n) == Belief::Unknown;
            let n_counts = counts_here.bump(diagonal, unknown);
            let n_cost = n_counts.cost_m(res, unknown_penalty);
            if dist[ni].map_or(true, |(best, _)| n_cost < best) {
                dist[ni] = Some((n_cost, n_counts));
                open.push(Reverse(HeapKey {
                    f: n_cost,
                    idx: ni,
                }));
            }
        }
    }
    dist.into_iter().map(|d| d.map(|(cost, _)| cost)).collect()
}

fn nearest_index(cells: &[Cell], pose: &Pose, resolution: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in cells.iter().enumerate() {
        let (x, y) = c.center(resolution);
        let d = math::hypot(x - pose.x, y - pose.y);
        if d <= best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn belief_los(map: &ObstacleMap, from: (f64, f64), to: (f64, f64)) -> bool {
    let dist = math::hypot(to.0 - from.0, to.1 - from.1);
    if dist <= 0.0 {
        return true;
    }
    let dir = math::atan2(to.1 - from.1, to.0 - from.0).to_degrees();
    !RayWalk::new(from, dir, dist, map.width(), map.height(), map.resolution())
        .any(|s| map.is_occupied(s.cell))
}

/// Whether a forward stride from the pose crosses any known-occupied cell.
/// The discrete path can legally hug corners the continuous chord clips.
fn stride_clear(map: &ObstacleMap, pose: &Pose, heading_deg: f64) -> bool {
    let rad = heading_deg.to_radians();
    let dest = (
        pose.x + crate::world::FORWARD_STEP_M * math::cos(rad),
        pose.y + crate::world::FORWARD_STEP_M * math::sin(rad),
    );
    let blocked = RayWalk::new(
        (pose.x, pose.y),
        heading_deg,
        crate::world::FORWARD_STEP_M,
        map.width(),
        map.height(),
        map.resolution(),
    )
    .any(|s| map.is_occupied(s.cell));
    !blocked && !map.is_occupied(crate::grid::cell_at(dest.0, dest.1, map.resolution()))
}

/// Emit the next action to track a planned path.
///
/// Turns when the bearing to the tracked path cell deviates from the heading
/// by more than [`TURN_DEADBAND_DEG`] (strictly), with positive bearing
/// turning left; moves forward otherwise. Emits `Stop` once the pose is
/// within one cell of the final path cell and the caller's stop condition
/// holds.
pub fn next_action(plan: &PathPlan, map: &ObstacleMap, pose: &Pose, stop_ready: bool) -> Action {
    let res = map.resolution();
    let last = plan.cells.len() - 1;
    let final_cell = plan.cells[last];
    let here = pose.cell(res);
    let at_final = (here.x - final_cell.x).abs() <= 1 && (here.y - final_cell.y).abs() <= 1;
    if at_final && stop_ready {
        return Action::Stop;
    }

    let i_near = nearest_index(&plan.cells, pose, res);
    // track ahead along the path as far as the belief map has clear sight,
    // within half a meter
    let mut target_idx = (i_near + 1).min(last);
    for j in (i_near + 1)..=last {
        let (x, y) = plan.cells[j].center(res);
        if math::hypot(x - pose.x, y - pose.y) > 0.5 {
            break;
        }
        if belief_los(map, (pose.x, pose.y), (x, y)) {
            target_idx = j;
        } else {
            break;
        }
    }

    let (tx, ty) = plan.cells[target_idx].center(res);
    let dist = math::hypot(tx - pose.x, ty - pose.y);
    if dist < 1e-9 {
        return if stop_ready && at_final {
            Action::Stop
        } else {
            Action::MoveForward
        };
    }
    let bearing = math::atan2(ty - pose.y, tx - pose.x).to_degrees();
    let deviation = math::angle_delta_deg(pose.heading_deg, bearing);
    if math::abs(deviation) > TURN_DEADBAND_DEG {
        let (turn, turned_heading) = if deviation > 0.0 {
            (Action::TurnLeft, pose.heading_deg + crate::world::TURN_STEP_DEG)
        } else {
            (Action::TurnRight, pose.heading_deg - crate::world::TURN_STEP_DEG)
        };
        // skim along a known wall rather than turn into it
        if !stride_clear(map, pose, turned_heading) && stride_clear(map, pose, pose.heading_deg) {
            Action::MoveForward
        } else {
            turn
        }
    } else if stride_clear(map, pose, pose.heading_deg) {
        Action::MoveForward
    } else {
        // forward chord blocked by a known wall: rotate toward whichever
        // side opens up, preferring the target's side
        let prefer = if deviation >= 0.0 {
            [Action::TurnLeft, Action::TurnRight]
        } else {
            [Action::TurnRight, Action::TurnLeft]
        };
        for turn in prefer {
            let heading = match turn {
                Action::TurnLeft => pose.heading_deg + crate::world::TURN_STEP_DEG,
                _ => pose.heading_deg - crate::world::TURN_STEP_DEG,
            };
            if stride_clear(map, pose, heading) {
                return turn;
            }
        }
        prefer[0]
    }
}
