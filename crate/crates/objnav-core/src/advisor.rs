//! The semantic-guidance boundary: prompt rendering, structured score
//! parsing, and the oracle/random advisor implementations behind one
//! interface. The remote (model-backed) implementation lives in the
//! companion crate, behind the same trait.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{cell_at, Cell, NEIGHBORS_4};
use crate::math;
use crate::world::{apply_action, Action, GridWorld, Pose};

/// Unit-interval scores for the four primary navigation actions.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionScores {
    pub forward: f64,
    pub backward: f64,
    pub left: f64,
    pub right: f64,
}

impl ActionScores {
    /// All four scores at 0.5; the stand-in when the advisor is unavailable.
    pub const NEUTRAL: ActionScores = ActionScores {
        forward: 0.5,
        backward: 0.5,
        left: 0.5,
        right: 0.5,
    };

    pub fn in_range(&self) -> bool {
        [self.forward, self.backward, self.left, self.right]
            .iter()
            .all(|s| (0.0..=1.0).contains(s))
    }
}

/// What the advisor is shown about the scene.
#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    /// Textual summary: visible categories with bearings and distances.
    SceneSummary(String),
    /// Opaque handle for image-based front ends.
    ImageRef(String),
}

/// One guidance query.
#[derive(Clone, Debug)]
pub struct AdvisorRequest {
    pub target: String,
    /// Most recent actions, oldest first; capped by the history module.
    pub history: Vec<Action>,
    pub observation: Observation,
}

/// Which advisor implementation an episode runs with.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AdvisorKind {
    Oracle,
    Random,
    Remote,
}

impl core::str::FromStr for AdvisorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(AdvisorKind::Oracle),
            "random" => Ok(AdvisorKind::Random),
            "remote" => Ok(AdvisorKind::Remote),
            other => Err(format!("unknown advisor kind '{other}'")),
        }
    }
}

impl core::fmt::Display for AdvisorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            AdvisorKind::Oracle => "oracle",
            AdvisorKind::Random => "random",
            AdvisorKind::Remote => "remote",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AdvisorError {
    #[error("advisor unavailable: {0}")]
    Unavailable(String),
}

/// Render the guidance prompt for a request. Byte-stable for identical
/// requests; history is listed oldest to newest.
pub fn render_prompt(req: &AdvisorRequest) -> String {
    let target = &req.target;
    let view = match &req.observation {
        Observation::SceneSummary(s) if s.is_empty() => "nothing notable".to_string(),
        Observation::SceneSummary(s) => s.clone(),
        Observation::ImageRef(r) => format!("[image {r}]"),
    };
    let history = if req.history.is_empty() {
        "none".to_string()
    } else {
        let names: Vec<&str> = req.history.iter().map(|a| a.name()).collect();
        names.join(", ")
    };
    format!(
        "You are a robot navigating an indoor environment in search of a {target}.\n\
         Current view: {view}.\n\
         Assign a probability score to each potential action below [go forward, go backward, turn right, turn left], indicating how likely it is to guide the robot toward the {target}.\n\
         Maintain forward progress toward corridor exits and avoid repetitive actions.\n\
         When providing your response, use this structure:\n\
         \x20   - Go forward: [Score]\n\
         \x20   - Go backward: [Score]\n\
         \x20   - Turn right: [Score]\n\
         \x20   - Turn left: [Score]\n\
         Each probability score should be a number between 0 and 1. 1 means full confidence that the action will lead to finding the {target}. 0 means no confidence.\n\
         Recent actions: {history}\n"
    )
}

/// Serialize scores into the response structure the prompt asks for.
/// `parse_scores` recovers the exact values.
pub fn format_scores_response(scores: &ActionScores) -> String {
    format!(
        "    - Go forward: {}\n    - Go backward: {}\n    - Turn right: {}\n    - Turn left: {}\n",
        scores.forward, scores.backward, scores.right, scores.left
    )
}

/// The four labeled lines a response must carry.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScoreLabel {
    GoForward,
    GoBackward,
    TurnRight,
    TurnLeft,
}

impl ScoreLabel {
    const ALL: [ScoreLabel; 4] = [
        ScoreLabel::GoForward,
        ScoreLabel::GoBackward,
        ScoreLabel::TurnRight,
        ScoreLabel::TurnLeft,
    ];

    fn pattern(&self) -> &'static str {
        match self {
            ScoreLabel::GoForward => "go forward",
            ScoreLabel::GoBackward => "go backward",
            ScoreLabel::TurnRight => "turn right",
            ScoreLabel::TurnLeft => "turn left",
        }
    }
}

impl core::fmt::Display for ScoreLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.pattern())
    }
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum ScoreParseError {
    #[error("missing score line for '{0}'")]
    Missing(ScoreLabel),
    #[error("duplicate score line for '{0}'")]
    Duplicate(ScoreLabel),
    #[error("score for '{label}' out of range: {value}")]
    OutOfRange { label: ScoreLabel, value: f64 },
    #[error("non-numeric score for '{0}'")]
    NotNumeric(ScoreLabel),
}

/// Extract the four action scores from a response.
///
/// Labels are matched case-insensitively; surrounding prose is ignored;
/// brackets around the number are optional. A label followed by a colon is
/// treated as a score line and must carry one decimal in `[0, 1]`; each label
/// must score exactly once.
pub fn parse_scores(text: &str) -> Result<ActionScores, ScoreParseError> {
    let mut found: [Option<f64>; 4] = [None; 4];
    for line in text.lines() {
        let lower = line.to_lowercase();
        for (slot, label) in ScoreLabel::ALL.iter().enumerate() {
            let Some(pos) = lower.find(label.pattern()) else {
                continue;
            };
            let rest = lower[pos + label.pattern().len()..].trim_start();
            let Some(rest) = rest.strip_prefix([':', '=']) else {
                continue; // prose mention, not a score line
            };
            let token: String = rest
                .trim_start_matches([' ', '\t', '[', '*'])
                .chars()
                .take_while(|c| c.is_ascii_digit() || *c == '.' || *c == '+' || *c == '-')
                .collect();
            let token = token.trim_end_matches('.');
            let value: f64 = token
                .parse()
                .map_err(|_| ScoreParseError::NotNumeric(*label))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(ScoreParseError::OutOfRange {
                    label: *label,
                    value,
                });
            }
            if found[slot].is_some() {
                return Err(ScoreParseError::Duplicate(*label));
            }
            found[slot] = Some(value);
        }
    }
    for (slot, label) in ScoreLabel::ALL.iter().enumerate() {
        if found[slot].is_none() {
            return Err(ScoreParseError::Missing(*label));
        }
    }
    Ok(ActionScores {
        forward: found[0].unwrap(),
        backward: found[1].unwrap(),
        right: found[2].unwrap(),
        left: found[3].unwrap(),
    })
}

/// Fixed verification prompt for a detection.
pub fn render_verification_prompt(target: &str, detected_category: &str, distance_m: f64) -> String {
    format!(
        "You are a robot verifying an object detection. The detector reports a {detected_category} about {distance_m:.2} m ahead.\n\
         Is the detected object a {target}? Answer yes or no.\n"
    )
}

/// Read a leading yes/no token from a verification response.
pub fn parse_yes_no(text: &str) -> Option<bool> {
    let word: String = text
        .split_whitespace()
        .next()?
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .collect();
    if word.eq_ignore_ascii_case("yes") {
        Some(true)
    } else if word.eq_ignore_ascii_case("no") {
        Some(false)
    } else {
        None
    }
}

/// Ground-truth context handed to advisors alongside each request.
pub struct AdvisorEnv<'w> {
    pub world: &'w GridWorld,
    pub pose: Pose,
}

/// A detection summary submitted for verification.
#[derive(Clone, Debug)]
pub struct VerifyQuery {
    pub detected_category: String,
    pub distance_m: f64,
    /// Set for injected false positives (noise-model artifacts).
    pub spurious: bool,
}

/// Maps (observation, target, history) to four action scores, and answers
/// detection verification queries.
pub trait Advisor {
    fn advise(
        &mut self,
        req: &AdvisorRequest,
        env: &AdvisorEnv<'_>,
    ) -> Result<ActionScores, AdvisorError>;

    fn verify(
        &mut self,
        target: &str,
        query: &VerifyQuery,
        env: &AdvisorEnv<'_>,
    ) -> Result<bool, AdvisorError>;
}

/// Multi-source BFS distance (in cells) from every footprint cell of
/// `category`, across free cells, 4-connected. `None` marks unreachable or
/// blocked cells.
pub fn bfs_distance_field(world: &GridWorld, category: &str) -> Vec<Option<u32>> {
    let (w, h) = (world.width(), world.height());
    let mut dist: Vec<Option<u32>> = alloc::vec![None; w * h];
    let mut queue: alloc::collections::VecDeque<Cell> = alloc::collections::VecDeque::new();
    for obj in world.instances_of(category) {
        for &c in &obj.footprint {
            let i = c.y as usize * w + c.x as usize;
            if dist[i].is_none() {
                dist[i] = Some(0);
                queue.push_back(c);
            }
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[c.y as usize * w + c.x as usize].unwrap();
        for (dx, dy) in NEIGHBORS_4 {
            let n = c.offset(dx, dy);
            if n.x < 0 || n.y < 0 || n.x as usize >= w || n.y as usize >= h {
                continue;
            }
            if world.is_blocked(n) {
                continue;
            }
            let i = n.y as usize * w + n.x as usize;
            if dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Geodesic distance scale of the oracle's score falloff, meters. Probe
/// distances differ by at most two strides, so the scale must sit near the
/// stride length for the four scores to spread usefully.
const ORACLE_SCALE_M: f64 = 1.0;

fn scores_from_field(world: &GridWorld, pose: &Pose, field: &[Option<u32>]) -> ActionScores {
    let w = world.width();
    let res = world.resolution();
    let probe = |offset_deg: f64| -> Option<f64> {
        let probe_pose = Pose::new(pose.x, pose.y, pose.heading_deg + offset_deg);
        let out = apply_action(world, &probe_pose, Action::MoveForward);
        if out.collided {
            return None;
        }
        let c = cell_at(out.pose.x, out.pose.y, res);
        field[c.y as usize * w + c.x as usize].map(|d| d as f64 * res)
    };
    let probes = [probe(0.0), probe(180.0), probe(90.0), probe(-90.0)];
    let d_min = probes
        .iter()
        .flatten()
        .fold(f64::INFINITY, |acc, d| acc.min(*d));
    if !d_min.is_finite() {
        return ActionScores {
            forward: 0.0,
            backward: 0.0,
            left: 0.0,
            right: 0.0,
        };
    }
    let score = |d: Option<f64>| {
        d.map(|d| math::exp(-(d - d_min) / ORACLE_SCALE_M).clamp(0.0, 1.0))
            .unwrap_or(0.0)
    };
    ActionScores {
        forward: score(probes[0]),
        backward: score(probes[1]),
        left: score(probes[2]),
        right: score(probes[3]),
    }
}

/// Ground-truth advisor: scores the four one-step probes by geodesic distance
/// to the nearest target instance, best direction normalized to 1.0. Blocked
/// probes score 0; an unreachable target scores all zeros.
pub fn oracle_scores(world: &GridWorld, pose: &Pose, target: &str) -> ActionScores {
    let field = bfs_distance_field(world, target);
    scores_from_field(world, pose, &field)
}

/// [`oracle_scores`] behind the [`Advisor`] trait, with the distance field
/// cached per target. One instance serves one world.
#[derive(Default)]
pub struct OracleAdvisor {
    fields: BTreeMap<String, Vec<Option<u32>>>,
}

impl OracleAdvisor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Advisor for OracleAdvisor {
    fn advise(
        &mut self,
        req: &AdvisorRequest,
        env: &AdvisorEnv<'_>,
    ) -> Result<ActionScores, AdvisorError> {
        let field = self
            .fields
            .entry(req.target.clone())
            .or_insert_with(|| bfs_distance_field(env.world, &req.target));
        Ok(scores_from_field(env.world, &env.pose, field))
    }

    fn verify(
        &mut self,
        target: &str,
        query: &VerifyQuery,
        _env: &AdvisorEnv<'_>,
    ) -> Result<bool, AdvisorError> {
        Ok(query.detected_category == target && !query.spurious)
    }
}

/// Geometry-blind baseline: four independent uniform draws per query from a
/// seeded generator. Verification stays truthful so the baseline differs
/// only in guidance.
pub struct RandomAdvisor {
    rng: ChaCha8Rng,
}

impl RandomAdvisor {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Advisor for RandomAdvisor {
    fn advise(
        &mut self,
        _req: &AdvisorRequest,
        _env: &AdvisorEnv<'_>,
    ) -> Result<ActionScores, AdvisorError> {
        // draw order: forward, backward, left, right
        Ok(ActionScores {
            forward: self.rng.gen_range(0.0..=1.0),
            backward: self.rng.gen_range(0.0..=1.0),
            left: self.rng.gen_range(0.0..=1.0),
            right: self.rng.gen_range(0.0..=1.0),
        })
    }

    fn verify(
        &mut self,
        target: &str,
        query: &VerifyQuery,
        _env: &AdvisorEnv<'_>,
    ) -> Result<bool, AdvisorError> {
        Ok(query.detected_category == target && !query.spurious)
    }
}
