//! Ground-truth environment, agent kinematics, and the raycast depth sensor.

use alloc::string::String;
use alloc::vec::Vec;

use crate::grid::{cell_at, Cell, CellSpan, Grid, RayWalk, NEIGHBORS_4};
use crate::math;

/// Forward displacement of one `MoveForward`, in meters.
pub const FORWARD_STEP_M: f64 = 0.25;
/// Rotation of one turn action, in degrees.
pub const TURN_STEP_DEG: f64 = 30.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellKind {
    Free,
    Obstacle,
}

/// One object, as a set of 4-connected footprint cells with a category label.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectInstance {
    pub category: String,
    pub footprint: Vec<Cell>,
}

/// Continuous agent pose over the discrete grid.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Degrees in `[0, 360)`, counter-clockwise from +x.
    pub heading_deg: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading_deg: f64) -> Self {
        Self {
            x,
            y,
            heading_deg: math::normalize_deg(heading_deg),
        }
    }

    pub fn cell(&self, resolution: f64) -> Cell {
        cell_at(self.x, self.y, resolution)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Action {
    /// Lowercase name, as used in prompts and logs.
    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveForward => "move forward",
            Action::TurnLeft => "turn left",
            Action::TurnRight => "turn right",
            Action::Stop => "stop",
        }
    }

    pub fn is_turn(&self) -> bool {
        matches!(self, Action::TurnLeft | Action::TurnRight)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("grid must be at least 3x3, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("object '{category}' has an empty footprint")]
    EmptyFootprint { category: String },
    #[error("object '{category}' footprint cell ({x}, {y}) is outside the grid")]
    FootprintOutOfBounds { category: String, x: i32, y: i32 },
    #[error("object '{category}' footprint cell ({x}, {y}) lies on an obstacle")]
    ObjectOnObstacle { category: String, x: i32, y: i32 },
    #[error("object '{category}' footprint is not 4-connected")]
    FootprintDisconnected { category: String },
    #[error("spawn ({x:.3}, {y:.3}) is outside the grid or blocked")]
    BadSpawn { x: f64, y: f64 },
    #[error("sensor config invalid: fov {fov_deg} deg, {ray_count} rays, range {max_range_m} m")]
    BadSensorConfig {
        fov_deg: f64,
        ray_count: usize,
        max_range_m: f64,
    },
}

/// Depth sensor parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SensorConfig {
    pub fov_deg: f64,
    pub ray_count: usize,
    pub max_range_m: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov_deg: 79.0,
            ray_count: 158,
            max_range_m: 5.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        if self.fov_deg > 0.0 && self.fov_deg <= 180.0 && self.ray_count >= 3 && self.max_range_m > 0.0
        {
            Ok(())
        } else {
            Err(WorldError::BadSensorConfig {
                fov_deg: self.fov_deg,
                ray_count: self.ray_count,
                max_range_m: self.max_range_m,
            })
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RayTerminal {
    HitObstacle,
    MaxRange,
}

#[derive(Clone, Copy, Debug)]
pub struct DepthRay {
    /// Offset from the agent heading, degrees; positive is left.
    pub angle_offset_deg: f64,
    pub range_m: f64,
    pub terminal: RayTerminal,
}

/// One depth scan: rays at uniform angular spacing across the field of view.
#[derive(Clone, Debug)]
pub struct DepthScan {
    pub rays: Vec<DepthRay>,
    pub fov_deg: f64,
    pub max_range_m: f64,
}

/// Result of applying an action to a pose.
#[derive(Clone, Copy, Debug)]
pub struct MoveOutcome {
    pub pose: Pose,
    pub collided: bool,
}

/// A footprint cell visible from a pose.
#[derive(Clone, Copy, Debug)]
pub struct VisibleCell {
    pub cell: Cell,
    pub distance_m: f64,
    /// Bearing relative to the agent heading, degrees in `(-180, 180]`.
    pub bearing_deg: f64,
}

/// Static ground-truth map: occupancy cells, object instances, spawn poses.
///
/// Immutable after construction and freely shareable across episodes.
#[derive(Clone, Debug)]
pub struct GridWorld {
    cells: Grid<CellKind>,
    resolution: f64,
    objects: Vec<ObjectInstance>,
    spawns: Vec<Pose>,
}

impl GridWorld {
    pub fn from_parts(
        cells: Grid<CellKind>,
        resolution: f64,
        objects: Vec<ObjectInstance>,
        spawns: Vec<Pose>,
    ) -> Result<Self, WorldError> {
        if cells.width() < 3 || cells.height() < 3 {
            return Err(WorldError::TooSmall {
                width: cells.width(),
                height: cells.height(),
            });
        }
        if resolution.is_nan() || resolution <= 0.0 {
            return Err(WorldError::BadResolution(resolution));
        }
        for obj in &objects {
            if obj.footprint.is_empty() {
                return Err(WorldError::EmptyFootprint {
                    category: obj.category.clone(),
                });
            }
            for &c in &obj.footprint {
                match cells.get(c) {
                    None => {
                        return Err(WorldError::FootprintOutOfBounds {
                            category: obj.category.clone(),
                            x: c.x,
                            y: c.y,
                        })
                    }
                    Some(CellKind::Obstacle) => {
                        return Err(WorldError::ObjectOnObstacle {
                            category: obj.category.clone(),
                            x: c.x,
                            y: c.y,
                        })
                    }
                    Some(CellKind::Free) => {}
                }
            }
            if !footprint_connected(&obj.footprint) {
                return Err(WorldError::FootprintDisconnected {
                    category: obj.category.clone(),
                });
            }
        }
        let world = Self {
            cells,
            resolution,
            objects,
            spawns: Vec::new(),
        };
        for &p in &spawns {
            if !world.cells.in_bounds(p.cell(resolution)) || world.is_blocked(p.cell(resolution)) {
                return Err(WorldError::BadSpawn { x: p.x, y: p.y });
            }
        }
        Ok(Self { spawns, ..world })
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

    pub fn kind(&self, c: Cell) -> Option<CellKind> {
        self.cells.get(c).copied()
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.kind(c) == Some(CellKind::Obstacle)
    }

    /// Out-of-bounds cells are blocked.
    pub fn is_blocked(&self, c: Cell) -> bool {
        self.kind(c) != Some(CellKind::Free)
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn spawns(&self) -> &[Pose] {
        &self.spawns
    }

    pub fn instances_of<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a ObjectInstance> {
        self.objects.iter().filter(move |o| o.category == category)
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.instances_of(category).next().is_some()
    }

    /// Distinct categories, in first-appearance order.
    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for o in &self.objects {
            if !out.contains(&o.category.as_str()) {
                out.push(&o.category);
            }
        }
        out
    }

    fn walk(&self, origin: (f64, f64), dir_deg: f64, max_dist: f64) -> RayWalk {
        RayWalk::new(
            origin,
            dir_deg,
            max_dist,
            self.width(),
            self.height(),
            self.resolution,
        )
    }

    /// True when no obstacle cell lies on the open segment between the two
    /// metric points. Endpoints on free cells never block.
    pub fn line_of_sight(&self, from: (f64, f64), to: (f64, f64)) -> bool {
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let dist = math::hypot(dx, dy);
        if dist <= 0.0 {
            return true;
        }
        let dir = math::atan2(dy, dx).to_degrees();
        !self
            .walk(from, dir, dist)
            .any(|span| self.is_obstacle(span.cell))
    }
}

fn footprint_connected(cells: &[Cell]) -> bool {
    if cells.len() <= 1 {
        return true;
    }
    let mut seen = alloc::vec![false; cells.len()];
    let mut stack = alloc::vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for (dx, dy) in NEIGHBORS_4 {
            let n = cells[i].offset(dx, dy);
            for (j, &c) in cells.iter().enumerate() {
                if !seen[j] && c == n {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
    }
    count == cells.len()
}

/// Apply one discrete action.
///
/// Turns rotate by exactly 30 degrees. `MoveForward` translates 0.25 m along
/// the heading unless any cell swept by the motion (or the destination cell)
/// is an obstacle or out of bounds, in which case the pose is unchanged and
/// `collided` is set. Collision is an outcome, not an error.
pub fn apply_action(world: &GridWorld, pose: &Pose, action: Action) -> MoveOutcome {
    match action {
        Action::Stop => MoveOutcome {
            pose: *pose,
            collided: false,
        },
        Action::TurnLeft => MoveOutcome {
            pose: Pose::new(pose.x, pose.y, pose.heading_deg + TURN_STEP_DEG),
            collided: false,
        },
        Action::TurnRight => MoveOutcome {
            pose: Pose::new(pose.x, pose.y, pose.heading_deg - TURN_STEP_DEG),
            collided: false,
        },
        Action::MoveForward => {
            let rad = pose.heading_deg.to_radians();
            let dest = (
                pose.x + FORWARD_STEP_M * math::cos(rad),
                pose.y + FORWARD_STEP_M * math::sin(rad),
            );
            let mut covered = 0.0;
            for span in world.walk((pose.x, pose.y), pose.heading_deg, FORWARD_STEP_M) {
                if world.is_obstacle(span.cell) {
                    return MoveOutcome {
                        pose: *pose,
                        collided: true,
                    };
                }
                covered = span.exit;
            }
            // leaving the grid, or landing exactly on a boundary into a bad cell
            if covered + 1e-9 < FORWARD_STEP_M
                || world.is_blocked(cell_at(dest.0, dest.1, world.resolution))
            {
                return MoveOutcome {
                    pose: *pose,
                    collided: true,
                };
            }
            MoveOutcome {
                pose: Pose::new(dest.0, dest.1, pose.heading_deg),
                collided: false,
            }
        }
    }
}

/// Cast a fan of depth rays at uniform angular spacing across
/// `[-fov/2, +fov/2]`.
///
/// Each ray reports the first obstacle intersection (sub-cell accurate: the
/// midpoint of the chord through the obstacle cell, so the cell at the
/// reported range is the obstacle itself) or `max_range`.
pub fn sense_depth(world: &GridWorld, pose: &Pose, cfg: &SensorConfig) -> DepthScan {
    debug_assert!(cfg.validate().is_ok());
    let n = cfg.ray_count;
    let mut rays = Vec::with_capacity(n);
    for i in 0..n {
        let offset = -cfg.fov_deg / 2.0 + cfg.fov_deg * i as f64 / (n - 1) as f64;
        let dir = pose.heading_deg + offset;
        let mut hit: Option<CellSpan> = None;
        for span in world.walk((pose.x, pose.y), dir, cfg.max_range_m) {
            if world.is_obstacle(span.cell) {
                hit = Some(span);
                break;
            }
        }
        let ray = match hit {
            Some(span) => DepthRay {
                angle_offset_deg: offset,
                range_m: (span.enter + span.exit) / 2.0,
                terminal: RayTerminal::HitObstacle,
            },
            None => DepthRay {
                angle_offset_deg: offset,
                range_m: cfg.max_range_m,
                terminal: RayTerminal::MaxRange,
            },
        };
        rays.push(ray);
    }
    DepthScan {
        rays,
        fov_deg: cfg.fov_deg,
        max_range_m: cfg.max_range_m,
    }
}

/// Footprint cells of `category` instances that are inside the field of view,
/// within sensor range, and not occluded by any obstacle.
pub fn visible_object_cells(
    world: &GridWorld,
    pose: &Pose,
    category: &str,
    cfg: &SensorConfig,
) -> Vec<VisibleCell> {
    let mut out = Vec::new();
    for obj in world.instances_of(category) {
        for &cell in &obj.footprint {
            let center = cell.center(world.resolution);
            let (dx, dy) = (center.0 - pose.x, center.1 - pose.y);
            let distance = math::hypot(dx, dy);
            if distance > cfg.max_range_m {
                continue;
            }
            let bearing = if distance < 1e-12 {
                0.0
            } else {
                math::angle_delta_deg(pose.heading_deg, math::atan2(dy, dx).to_degrees())
            };
            if math::abs(bearing) > cfg.fov_deg / 2.0 {
                continue;
            }
            if !world.line_of_sight((pose.x, pose.y), center) {
                continue;
            }
            out.push(VisibleCell {
                cell,
                distance_m: distance,
                bearing_deg: bearing,
            });
        }
    }
    out
}
