//! Shared helpers for in-crate tests.

use alloc::vec::Vec;

use crate::grid::Cell;
use crate::mapper::{Belief, ObstacleMap};
use crate::planner::{expand, StepCounts};
use crate::world::{DepthRay, DepthScan, Pose, RayTerminal};

/// Build a belief map from rows of `.` (free), `#` (occupied), and anything
/// else unknown, by synthesizing one-cell scans.
pub(crate) fn belief_map(rows: &[&str]) -> ObstacleMap {
    let mut map = ObstacleMap::new(rows[0].len(), rows.len(), 0.05).unwrap();
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            let belief = match ch {
                '.' => Belief::Free,
                '#' => Belief::Occupied,
                _ => continue,
            };
            let c = Cell::new(x as i32, y as i32);
            let (cx, cy) = c.center(0.05);
            map.integrate_scan(
                &Pose::new(cx, cy, 0.0),
                &DepthScan {
                    rays: alloc::vec![DepthRay {
                        angle_offset_deg: 0.0,
                        range_m: 0.01,
                        terminal: if belief == Belief::Occupied {
                            RayTerminal::HitObstacle
                        } else {
                            RayTerminal::MaxRange
                        },
                    }],
                    fov_deg: 1.0,
                    max_range_m: 1.0,
                },
            );
        }
    }
    map
}

/// Exhaustive relaxation oracle for shortest-path costs, sharing only the
/// neighbor rule and the exact cost representation with the planner.
pub(crate) fn oracle_cost(
    map: &ObstacleMap,
    start: Cell,
    goal: Cell,
    penalty: f64,
) -> Option<f64> {
    let (w, h) = (map.width(), map.height());
    let res = map.resolution();
    let index = |c: Cell| c.y as usize * w + c.x as usize;
    if map.belief(start) != Belief::Free
        || !map.in_bounds(goal)
        || map.belief(goal) == Belief::Occupied
    {
        return None;
    }
    let mut dist: Vec<Option<(f64, StepCounts)>> = alloc::vec![None; w * h];
    dist[index(start)] = Some((0.0, StepCounts::default()));
    loop {
        let mut changed = false;
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                let c = Cell::new(x, y);
                let Some((_, counts)) = dist[index(c)] else {
                    continue;
                };
                for (n, diagonal) in expand(map, c) {
                    let unknown = map.belief(n) == Belief::Unknown;
                    let n_counts = counts.bump(diagonal, unknown);
                    let n_cost = n_counts.cost_m(res, penalty);
                    if dist[index(n)].map_or(true, |(best, _)| n_cost < best) {
                        dist[index(n)] = Some((n_cost, n_counts));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[index(goal)].map(|(cost, _)| cost)
}
