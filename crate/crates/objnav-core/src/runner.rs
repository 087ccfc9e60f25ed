//! Episode orchestration: the initialization spin, advisor-guided frontier
//! exploration, the verified goal approach, and SR/SPL metrics.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::advisor::{
    ActionScores, Advisor, AdvisorEnv, AdvisorRequest, Observation,
};
use crate::frontier::detect_frontiers;
use crate::goalnav::{
    goal_waypoints, simulate_detection, verify_detection, DetectorConfig, GoalApproach, GoalConfig,
};
use crate::grid::Cell;
use crate::history::ActionHistory;
use crate::mapper::ObstacleMap;
use crate::math;
use crate::planner::{next_action, plan_path, PathPlan, PlannerConfig};
use crate::valuemap::{project_scores, rank_frontiers, ConfidenceParams, ValueMap};
use crate::world::{
    apply_action, sense_depth, visible_object_cells, Action, GridWorld, Pose, SensorConfig,
    TURN_STEP_DEG,
};

/// Steps in the initialization rotation (a full 360 degrees of turns).
pub const INIT_ROTATION_STEPS: u32 = (360.0 / TURN_STEP_DEG) as u32;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HistoryConfig {
    /// Ring capacity N for the recent-action buffer.
    pub capacity: usize,
    /// Half-window k for oscillation detection (2k actions inspected).
    pub oscillation_k: usize,
    /// Disabling removes history from prompts and turns off the
    /// oscillation fallback (the ablation switch).
    pub enabled: bool,
}

impl Default for HistoryConfig {
    fn default() -> Self {
        Self {
            capacity: 10,
            oscillation_k: 3,
            enabled: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ValueMapConfig {
    pub lambda_per_m: f64,
    /// Value of cells no observation has touched.
    pub neutral: f64,
    /// Projection radius; the sensor range when unset.
    pub projection_radius_m: Option<f64>,
}

impl Default for ValueMapConfig {
    fn default() -> Self {
        Self {
            lambda_per_m: 0.1,
            neutral: 0.5,
            projection_radius_m: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FrontierConfig {
    /// Components below this size are sensor-noise specks.
    pub min_size: usize,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self { min_size: 3 }
    }
}

/// Everything an episode needs beyond the world and the spec.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NavConfig {
    pub sensor: SensorConfig,
    pub valuemap: ValueMapConfig,
    pub history: HistoryConfig,
    pub detector: DetectorConfig,
    pub frontier: FrontierConfig,
    pub planner: PlannerConfig,
    pub goal: GoalConfig,
    /// Success additionally requires line of sight to the target cell;
    /// disable for pure-distance stopping.
    pub require_visibility: bool,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            sensor: SensorConfig::default(),
            valuemap: ValueMapConfig::default(),
            history: HistoryConfig::default(),
            detector: DetectorConfig::default(),
            frontier: FrontierConfig::default(),
            planner: PlannerConfig::default(),
            goal: GoalConfig::default(),
            require_visibility: true,
        }
    }
}

impl NavConfig {
    pub fn standard() -> Self {
        Self::default()
    }
}

/// One episode task.
#[derive(Clone, Debug)]
pub struct EpisodeSpec {
    pub target: String,
    pub start: Pose,
    pub max_steps: u32,
    pub success_radius_m: f64,
    pub seed: u64,
}

impl EpisodeSpec {
    pub fn new(target: impl Into<String>, start: Pose, seed: u64) -> Self {
        Self {
            target: target.into(),
            start,
            max_steps: 500,
            success_radius_m: 1.0,
            seed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Termination {
    StoppedSuccess,
    StoppedFailure,
    Timeout,
    NoFrontier,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::StoppedSuccess => "stopped-success",
            Termination::StoppedFailure => "stopped-failure",
            Termination::Timeout => "timeout",
            Termination::NoFrontier => "no-frontier",
        }
    }
}

/// Episode outcome and accounting.
#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub success: bool,
    /// Emitted actions, including the final stop.
    pub steps: u32,
    /// Actual traveled distance, meters.
    pub path_length_m: f64,
    /// Ground-truth shortest distance to a success pose, meters.
    pub shortest_length_m: f64,
    pub termination: Termination,
    pub final_pose: Pose,
    /// Full action trace, replayable against the world.
    pub actions: Vec<Action>,
    pub oscillation_events: u32,
    pub fallback_events: u32,
    pub advisor_failures: u32,
    pub goal_phase_entries: u32,
}

impl EpisodeResult {
    /// The per-episode term of the SPL sum.
    pub fn spl_term(&self) -> f64 {
        if !self.success {
            return 0.0;
        }
        self.shortest_length_m / self.path_length_m.max(self.shortest_length_m)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeError {
    #[error("target '{0}' has no instance in the world")]
    UnknownTarget(String),
    #[error("start pose is outside the grid or on a blocked cell")]
    StartBlocked,
    #[error("start heading {0} is not a multiple of the turn increment")]
    BadHeading(f64),
    #[error("max_steps must be at least 1")]
    BadMaxSteps,
    #[error("no traversable path from the start to any success pose")]
    UnreachableTarget,
    #[error("invalid config: {0}")]
    BadConfig(String),
}

/// Which phase the protocol is in, as reported to observers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    Init,
    Explore,
    GoalNav,
}

/// Per-step view for snapshot export and tracing.
pub struct StepSnapshot<'a> {
    pub step: u32,
    pub phase: Phase,
    pub action: Action,
    pub collided: bool,
    pub pose: Pose,
    pub obstacle_map: &'a ObstacleMap,
    pub value_map: &'a ValueMap,
}

/// Callback driven once per emitted action.
pub trait StepObserver {
    fn on_step(&mut self, snapshot: &StepSnapshot<'_>);
}

struct NoopObserver;

impl StepObserver for NoopObserver {
    fn on_step(&mut self, _snapshot: &StepSnapshot<'_>) {}
}

/// True when the pose satisfies the stop condition for `target`: within
/// `radius_m` of some footprint cell center, with line of sight to that cell
/// unless visibility is waived.
pub fn success_check(
    world: &GridWorld,
    pose: &Pose,
    target: &str,
    radius_m: f64,
    require_visibility: bool,
) -> bool {
    for obj in world.instances_of(target) {
        for &cell in &obj.footprint {
            let center = cell.center(world.resolution());
            let d = math::hypot(center.0 - pose.x, center.1 - pose.y);
            if d > radius_m {
                continue;
            }
            if !require_visibility || world.line_of_sight((pose.x, pose.y), center) {
                return true;
            }
        }
    }
    false
}

/// Shortest geodesic (8-connected, octile costs, ground truth) from the start
/// to any free cell whose center satisfies the stop condition, clamped below
/// by one cell resolution so SPL stays finite.
pub fn shortest_length(
    world: &GridWorld,
    start: &Pose,
    target: &str,
    radius_m: f64,
    require_visibility: bool,
) -> Result<f64, EpisodeError> {
    let res = world.resolution();
    let map = ObstacleMap::from_ground_truth(world);
    let goal_ok = |c: Cell| {
        let (x, y) = c.center(res);
        !world.is_blocked(c)
            && success_check(world, &Pose::new(x, y, 0.0), target, radius_m, require_visibility)
    };
    let start_cell = start.cell(res);
    if world.is_blocked(start_cell) {
        return Err(EpisodeError::StartBlocked);
    }
    let field = crate::planner::cost_field(&map, start_cell, 1.0);
    let mut best: Option<f64> = None;
    for (c, _) in map.iter_cells() {
        if !goal_ok(c) {
            continue;
        }
        if let Some(d) = field[c.y as usize * map.width() + c.x as usize] {
            if best.map_or(true, |b| d < b) {
                best = Some(d);
            }
        }
    }
    best.map(|d| d.max(res))
        .ok_or(EpisodeError::UnreachableTarget)
}

/// Re-simulate a logged action sequence kinematically.
pub fn replay_actions(world: &GridWorld, start: &Pose, actions: &[Action]) -> Pose {
    let mut pose = *start;
    for &a in actions {
        pose = apply_action(world, &pose, a).pose;
    }
    pose
}

/// Textual scene summary: nearest visible cell per category, with distance
/// and bearing.
pub fn scene_summary(world: &GridWorld, pose: &Pose, sensor: &SensorConfig) -> String {
    let mut parts: Vec<String> = Vec::new();
    for category in world.categories() {
        let visible = visible_object_cells(world, pose, category, sensor);
        if let Some(nearest) = visible
            .iter()
            .min_by(|a, b| a.distance_m.total_cmp(&b.distance_m))
        {
            parts.push(alloc::format!(
                "{category} {:.2} m at {:.0} deg",
                nearest.distance_m,
                nearest.bearing_deg
            ));
        }
    }
    parts.join("; ")
}

struct Episode<'w> {
    world: &'w GridWorld,
    cfg: &'w NavConfig,
    spec: &'w EpisodeSpec,
    pose: Pose,
    omap: ObstacleMap,
    vmap: ValueMap,
    history: ActionHistory,
    rng: ChaCha8Rng,
    conf: ConfidenceParams,
    proj_radius: f64,
    steps: u32,
    path_length: f64,
    actions: Vec<Action>,
    oscillation_events: u32,
    fallback_events: u32,
    advisor_failures: u32,
    goal_phase_entries: u32,
}

enum Mode {
    Explore,
    Goal(GoalApproach),
}

struct ExploreNav {
    plan: Option<PathPlan>,
    age: u32,
    /// Frontier midpoints not worth chasing: reached-but-unresolvable ones,
    /// plus goals repeatedly abandoned after sustained commitment (route
    /// watersheds cause endless pacing between two near-equal frontiers).
    sterile: Vec<Cell>,
    chases: Vec<(Cell, u32)>,
}

/// Committed chases of one goal before it is set aside.
const CHASE_LIMIT: u32 = 3;

impl ExploreNav {
    fn record_abandonment(&mut self, goal: Cell) {
        match self.chases.iter_mut().find(|(c, _)| *c == goal) {
            Some((_, n)) => *n += 1,
            None => self.chases.push((goal, 1)),
        }
        let count = self
            .chases
            .iter()
            .find(|(c, _)| *c == goal)
            .map(|(_, n)| *n)
            .unwrap_or(0);
        if count >= CHASE_LIMIT && !self.sterile.contains(&goal) {
            self.sterile.push(goal);
        }
    }
}

impl<'w> Episode<'w> {
    fn emit(&mut self, action: Action, phase: Phase, observer: &mut dyn StepObserver) {
        let out = apply_action(self.world, &self.pose, action);
        let moved = math::hypot(out.pose.x - self.pose.x, out.pose.y - self.pose.y);
        self.path_length += moved;
        self.history.push(action, moved > 0.0);
        self.actions.push(action);
        self.steps += 1;
        self.pose = out.pose;
        observer.on_step(&StepSnapshot {
            step: self.steps,
            phase,
            action,
            collided: out.collided,
            pose: self.pose,
            obstacle_map: &self.omap,
            value_map: &self.vmap,
        });
    }

    fn sense(&mut self) {
        let scan = sense_depth(self.world, &self.pose, &self.cfg.sensor);
        self.omap.integrate_scan(&self.pose, &scan);
    }

    /// Detect, gate on confidence, verify through the advisor. Failed
    /// verification transports fail closed.
    fn gated_detection(
        &mut self,
        advisor: &mut dyn Advisor,
    ) -> Option<crate::goalnav::Detection> {
        let det = simulate_detection(
            self.world,
            &self.pose,
            &self.spec.target,
            &self.cfg.detector,
            &self.cfg.sensor,
            &mut self.rng,
        )?;
        let passes_gate = det.confidence > self.cfg.detector.threshold;
        if !passes_gate {
            return None;
        }
        let env = AdvisorEnv {
            world: self.world,
            pose: self.pose,
        };
        match verify_detection(advisor, &det, &self.spec.target, &env) {
            Ok(true) => Some(det),
            Ok(false) => None,
            Err(_) => {
                self.advisor_failures += 1;
                None
            }
        }
    }

    fn advise_and_fuse(&mut self, advisor: &mut dyn Advisor) {
        let request = AdvisorRequest {
            target: self.spec.target.clone(),
            history: if self.cfg.history.enabled {
                self.history.actions()
            } else {
                Vec::new()
            },
            observation: Observation::SceneSummary(scene_summary(
                self.world,
                &self.pose,
                &self.cfg.sensor,
            )),
        };
        let env = AdvisorEnv {
            world: self.world,
            pose: self.pose,
        };
        let scores = match advisor.advise(&request, &env) {
            Ok(s) => s,
            Err(_) => {
                self.advisor_failures += 1;
                ActionScores::NEUTRAL
            }
        };
        let frame = project_scores(&self.pose, &scores, &self.omap, &self.conf, self.proj_radius);
        self.vmap.fuse_frame(&frame);
    }

    /// Plan toward the best-value reachable frontier. The committed plan is
    /// reused until a replan trigger fires: its frontier dissolved, its next
    /// cell became occupied, the replan interval elapsed, or a competing
    /// frontier beats the committed one by the reselect margin. `None` means
    /// frontier exhaustion.
    fn explore_action(&mut self, nav: &mut ExploreNav) -> Option<Action> {
        let frontiers = detect_frontiers(&self.omap, self.cfg.frontier.min_size);
        if frontiers.is_empty() {
            return None;
        }
        let here = self.pose.cell(self.omap.resolution());

        // a frontier that survives being stood on cannot be resolved from
        // reachable space; stop chasing it
        if let Some(plan) = &nav.plan {
            let goal = plan.goal();
            let arrived = (here.x - goal.x).abs() <= 1 && (here.y - goal.y).abs() <= 1;
            if arrived && frontiers.iter().any(|f| f.midpoint == goal) {
                if !nav.sterile.contains(&goal) {
                    nav.sterile.push(goal);
                }
                nav.plan = None;
            }
        }

        let mut ranked: Vec<&crate::frontier::Frontier> =
            rank_frontiers(&frontiers, &self.vmap, &self.pose)
                .into_iter()
                .filter(|f| !nav.sterile.contains(&f.midpoint))
                .collect();
        if ranked.is_empty() {
            // everything is marked sterile: give the set another chance
            nav.sterile.clear();
            ranked = rank_frontiers(&frontiers, &self.vmap, &self.pose);
        }

        if let Some(plan) = &nav.plan {
            let committed = plan.goal();
            let still_a_frontier = ranked.iter().any(|f| f.midpoint == committed);
            let outvalued = self.vmap.value(ranked[0].midpoint)
                > self.vmap.value(committed) + self.cfg.planner.reselect_margin;
            let fresh = still_a_frontier
                && !outvalued
                && nav.age < self.cfg.planner.replan_interval
                && !plan.next_cell_occupied(&self.omap, &self.pose);
            if fresh {
                nav.age += 1;
                return Some(next_action(plan, &self.omap, &self.pose, false));
            }
        }
        for frontier in ranked {
            if let Ok(plan) = plan_path(
                &self.omap,
                here,
                frontier.midpoint,
                self.cfg.planner.unknown_penalty,
            ) {
                // walking away from a still-standing goal after sustained
                // commitment counts as one failed chase
                if let Some(old) = &nav.plan {
                    let old_goal = old.goal();
                    if old_goal != plan.goal()
                        && nav.age >= 2
                        && frontiers.iter().any(|f| f.midpoint == old_goal)
                    {
                        nav.record_abandonment(old_goal);
                    }
                }
                let action = next_action(&plan, &self.omap, &self.pose, false);
                nav.plan = Some(plan);
                nav.age = 1;
                return Some(action);
            }
        }
        None
    }

    fn stop_condition(&self) -> bool {
        success_check(
            self.world,
            &self.pose,
            &self.spec.target,
            self.spec.success_radius_m,
            self.cfg.require_visibility,
        )
    }

    fn finish(self, termination: Termination, shortest: f64) -> EpisodeResult {
        let success = termination == Termination::StoppedSuccess;
        EpisodeResult {
            success,
            steps: self.steps,
            path_length_m: self.path_length,
            shortest_length_m: shortest,
            termination,
            final_pose: self.pose,
            actions: self.actions,
            oscillation_events: self.oscillation_events,
            fallback_events: self.fallback_events,
            advisor_failures: self.advisor_failures,
            goal_phase_entries: self.goal_phase_entries,
        }
    }
}

/// Run one episode: a 12-turn initialization rotation, advisor-guided
/// frontier exploration, and the verified goal approach; ends on stop, the
/// step budget, or frontier exhaustion.
pub fn run_episode(
    world: &GridWorld,
    spec: &EpisodeSpec,
    advisor: &mut dyn Advisor,
    cfg: &NavConfig,
) -> Result<EpisodeResult, EpisodeError> {
    run_episode_observed(world, spec, advisor, cfg, &mut NoopObserver)
}

/// [`run_episode`] with a per-step observer for raster export and tracing.
pub fn run_episode_observed(
    world: &GridWorld,
    spec: &EpisodeSpec,
    advisor: &mut dyn Advisor,
    cfg: &NavConfig,
    observer: &mut dyn StepObserver,
) -> Result<EpisodeResult, EpisodeError> {
    if spec.max_steps < 1 {
        return Err(EpisodeError::BadMaxSteps);
    }
    if !world.has_category(&spec.target) {
        return Err(EpisodeError::UnknownTarget(spec.target.clone()));
    }
    cfg.sensor
        .validate()
        .map_err(|e| EpisodeError::BadConfig(alloc::format!("{e}")))?;
    let res = world.resolution();
    if world.is_blocked(spec.start.cell(res)) {
        return Err(EpisodeError::StartBlocked);
    }
    let rem = spec.start.heading_deg % TURN_STEP_DEG;
    if rem.abs() > 1e-9 && (TURN_STEP_DEG - rem).abs() > 1e-9 {
        return Err(EpisodeError::BadHeading(spec.start.heading_deg));
    }

    let shortest = shortest_length(
        world,
        &spec.start,
        &spec.target,
        spec.success_radius_m,
        cfg.require_visibility,
    )?;

    let mut ep = Episode {
        world,
        cfg,
        spec,
        pose: spec.start,
        omap: ObstacleMap::new(world.width(), world.height(), res)
            .expect("world dimensions already validated"),
        vmap: ValueMap::new(world.width(), world.height(), res, cfg.valuemap.neutral),
        history: ActionHistory::new(cfg.history.capacity),
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        conf: ConfidenceParams {
            lambda_per_m: cfg.valuemap.lambda_per_m,
            theta_fov_deg: cfg.sensor.fov_deg,
        },
        proj_radius: cfg
            .valuemap
            .projection_radius_m
            .unwrap_or(cfg.sensor.max_range_m),
        steps: 0,
        path_length: 0.0,
        actions: Vec::new(),
        oscillation_events: 0,
        fallback_events: 0,
        advisor_failures: 0,
        goal_phase_entries: 0,
    };

    // Phase 1: full rotation, integrating a scan at each of the 12 headings.
    let mut pending = None;
    for _ in 0..INIT_ROTATION_STEPS {
        if ep.steps >= spec.max_steps {
            return Ok(ep.finish(Termination::Timeout, shortest));
        }
        ep.sense();
        if pending.is_none() {
            pending = ep.gated_detection(advisor);
        }
        ep.emit(Action::TurnLeft, Phase::Init, observer);
    }

    let mut nav = ExploreNav {
        plan: None,
        age: 0,
        sterile: Vec::new(),
        chases: Vec::new(),
    };
    let mut mode = match pending {
        Some(det) => {
            ep.goal_phase_entries += 1;
            let wp = goal_waypoints(&ep.vmap, &det, &ep.omap, &cfg.goal);
            Mode::Goal(GoalApproach::new(&wp, &ep.omap, &ep.pose, &cfg.planner))
        }
        None => Mode::Explore,
    };
    let mut suppress_gate = false;

    loop {
        if ep.steps >= spec.max_steps {
            return Ok(ep.finish(Termination::Timeout, shortest));
        }
        ep.sense();
        mode = match mode {
            Mode::Goal(mut approach) => {
                if ep.stop_condition() {
                    ep.emit(Action::Stop, Phase::GoalNav, observer);
                    let termination = if success_check(
                        world,
                        &ep.pose,
                        &spec.target,
                        spec.success_radius_m,
                        cfg.require_visibility,
                    ) {
                        Termination::StoppedSuccess
                    } else {
                        Termination::StoppedFailure
                    };
                    return Ok(ep.finish(termination, shortest));
                }
                match approach.step(&ep.omap, &ep.pose, &cfg.planner) {
                    Some(action) => {
                        ep.emit(action, Phase::GoalNav, observer);
                        Mode::Goal(approach)
                    }
                    None => {
                        // waypoints exhausted: back to exploration; skip one
                        // gate check so a still-standing detection cannot
                        // re-enter instantly without progress
                        nav.plan = None;
                        suppress_gate = true;
                        Mode::Explore
                    }
                }
            }
            Mode::Explore => {
                let gated = if suppress_gate {
                    suppress_gate = false;
                    None
                } else {
                    ep.gated_detection(advisor)
                };
                if let Some(det) = gated {
                    ep.goal_phase_entries += 1;
                    let wp = goal_waypoints(&ep.vmap, &det, &ep.omap, &cfg.goal);
                    Mode::Goal(GoalApproach::new(&wp, &ep.omap, &ep.pose, &cfg.planner))
                } else {
                    ep.advise_and_fuse(advisor);
                    let oscillating = cfg.history.enabled
                        && ep.history.detect_oscillation(cfg.history.oscillation_k);
                    let action = if oscillating {
                        ep.oscillation_events += 1;
                        ep.fallback_events += 1;
                        ep.history.fallback_action()
                    } else {
                        match ep.explore_action(&mut nav) {
                            Some(a) => a,
                            None => return Ok(ep.finish(Termination::NoFrontier, shortest)),
                        }
                    };
                    ep.emit(action, Phase::Explore, observer);
                    Mode::Explore
                }
            }
        };
    }
}

/// Batch metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// Success rate: mean success indicator.
    pub sr: f64,
    /// Success weighted by path length.
    pub spl: f64,
    pub episodes: usize,
}

/// SR and SPL over a nonempty result set (`None` when empty).
pub fn compute_metrics(results: &[EpisodeResult]) -> Option<Metrics> {
    if results.is_empty() {
        return None;
    }
    let n = results.len() as f64;
    let sr = results.iter().filter(|r| r.success).count() as f64 / n;
    let spl = results.iter().map(|r| r.spl_term()).sum::<f64>() / n;
    Some(Metrics {
        sr,
        spl,
        episodes: results.len(),
    })
}
