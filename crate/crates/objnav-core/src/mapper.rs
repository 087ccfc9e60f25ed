//! The agent's 2D obstacle belief map, built from depth scans.

use crate::grid::{Cell, Grid, RayWalk};
use crate::world::{CellKind, DepthScan, GridWorld, Pose, RayTerminal};

/// Per-cell belief state.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Belief {
    Unknown,
    Free,
    Occupied,
}

#[derive(Debug, thiserror::Error)]
#[error("belief map must be at least 3x3, got {width}x{height}")]
pub struct BadMapDims {
    pub width: usize,
    pub height: usize,
}

/// Ternary occupancy belief grid. Starts all-unknown; knowledge only grows,
/// and occupied marks are never downgraded.
#[derive(Clone, Debug)]
pub struct ObstacleMap {
    cells: Grid<Belief>,
    resolution: f64,
}

impl ObstacleMap {
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self, BadMapDims> {
        if width < 3 || height < 3 {
            return Err(BadMapDims { width, height });
        }
        Ok(Self {
            cells: Grid::new(width, height, Belief::Unknown),
            resolution,
        })
    }

    /// The fully-known belief for a ground-truth map (obstacles occupied,
    /// everything else free). Useful for ideal-path queries and tests.
    pub fn from_ground_truth(world: &GridWorld) -> Self {
        let mut cells = Grid::new(world.width(), world.height(), Belief::Free);
        for y in 0..world.height() as i32 {
            for x in 0..world.width() as i32 {
                let c = Cell::new(x, y);
                if world.kind(c) == Some(CellKind::Obstacle) {
                    cells.set(c, Belief::Occupied);
                }
            }
        }
        Self {
            cells,
            resolution: world.resolution(),
        }
    }

    pub fn width(&self) -> usize {
        self.cells.width()
    }

    pub fn height(&self) -> usize {
        self.cells.height()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        self.cells.in_bounds(c)
    }

    /// Out-of-bounds queries read as unknown.
    pub fn belief(&self, c: Cell) -> Belief {
        self.cells.get(c).copied().unwrap_or(Belief::Unknown)
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.belief(c) == Belief::Occupied
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, Belief)> + '_ {
        self.cells.iter_cells().map(|(c, b)| (c, *b))
    }

    pub fn known_cells(&self) -> usize {
        self.cells
            .as_slice()
            .iter()
            .filter(|b| **b != Belief::Unknown)
            .count()
    }

    fn mark_free(&mut self, c: Cell) {
        if let Some(b) = self.cells.get_mut(c) {
            if *b == Belief::Unknown {
                *b = Belief::Free;
            }
        }
    }

    fn mark_occupied(&mut self, c: Cell) {
        if let Some(b) = self.cells.get_mut(c) {
            *b = Belief::Occupied;
        }
    }

    /// Integrate one depth scan taken at `pose`.
    ///
    /// Cells traversed by a ray strictly before its terminal range become
    /// free; the cell containing the terminal point becomes occupied when the
    /// ray hit an obstacle. Occupied beats free, within and across scans.
    pub fn integrate_scan(&mut self, pose: &Pose, scan: &DepthScan) {
        for ray in &scan.rays {
            let dir = pose.heading_deg + ray.angle_offset_deg;
            let walk = RayWalk::new(
                (pose.x, pose.y),
                dir,
                ray.range_m,
                self.width(),
                self.height(),
                self.resolution,
            );
            let spans: alloc::vec::Vec<_> = walk.collect();
            match ray.terminal {
                RayTerminal::HitObstacle => {
                    // the reported range lies inside the obstacle cell, so the
                    // last clipped span is exactly that cell
                    if let Some((last, before)) = spans.split_last() {
                        for s in before {
                            self.mark_free(s.cell);
                        }
                        if last.exit >= ray.range_m {
                            self.mark_occupied(last.cell);
                        } else {
                            // ray left the grid before its terminal
                            self.mark_free(last.cell);
                        }
                    }
                }
                RayTerminal::MaxRange => {
                    for s in &spans {
                        self.mark_free(s.cell);
                    }
                }
            }
        }
    }
}
