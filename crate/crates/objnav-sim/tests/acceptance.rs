//! Acceptance suite: one test per release criterion, each printing a
//! PASS line and holding to its runtime budget. Oracles used for
//! equivalence checks are implemented here, independently of the library
//! code paths they verify.
//!
//! Run with:
//! `cargo test -p objnav-sim --test acceptance -- --test-threads=1 --nocapture`

use std::time::{Duration, Instant};

use objnav_core::advisor::{
    format_scores_response, parse_scores, ActionScores, Advisor, AdvisorEnv, AdvisorError,
    AdvisorKind, AdvisorRequest, OracleAdvisor, ScoreParseError, VerifyQuery,
};
use objnav_core::frontier::detect_frontiers;
use objnav_core::goalnav::simulate_detection;
use objnav_core::grid::Cell;
use objnav_core::mapfile::load_world;
use objnav_core::mapper::{Belief, ObstacleMap};
use objnav_core::planner::{plan_path, PlanError, StepCounts};
use objnav_core::runner::{
    compute_metrics, replay_actions, run_episode, EpisodeResult, EpisodeSpec, NavConfig,
    Termination,
};
use objnav_core::valuemap::{confidence, fuse_cell, ConfidenceParams};
use objnav_core::world::{Action, DepthRay, DepthScan, Pose, RayTerminal};
use objnav_sim::batch::{run_batch, LoadedEpisode};
use objnav_sim::config::RemoteConfig;
use objnav_sim::mazegen::{rooms_scenario, twin_scenario, RoomsParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn budget(start: Instant, limit: Duration, name: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < limit,
        "{name} exceeded its runtime budget: {elapsed:?} >= {limit:?}"
    );
}

// --- criterion 1 --------------------------------------------------------

#[test]
fn criterion_01_confidence_model() {
    let start = Instant::now();

    // boundary identities
    let p = ConfidenceParams {
        lambda_per_m: 0.1,
        theta_fov_deg: 79.0,
    };
    assert_eq!(confidence(0.0, 0.0, &p).unwrap(), 1.0);
    for d in [0.0, 0.7, 3.0, 9.5] {
        for sign in [-1.0, 1.0] {
            let c = confidence(d, sign * p.theta_fov_deg / 2.0, &p).unwrap();
            assert!(c.abs() <= 1e-12, "edge confidence {c}");
        }
    }

    // 100 randomized points against an independent evaluation using the
    // half-angle identity cos^2 x = (1 + cos 2x) / 2
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let lambda = rng.gen_range(0.0..2.0);
        let fov = rng.gen_range(10.0..180.0);
        let d = rng.gen_range(0.0..12.0);
        let theta = rng.gen_range(-1.0..1.0) * fov / 2.0;
        let p = ConfidenceParams {
            lambda_per_m: lambda,
            theta_fov_deg: fov,
        };
        let got = confidence(d, theta, &p).unwrap();
        let ratio = theta / (fov / 2.0);
        let reference =
            (-lambda * d).exp() * (1.0 + (ratio * std::f64::consts::PI).cos()) / 2.0;
        assert!(
            (got - reference).abs() <= 1e-12,
            "mismatch at d={d} theta={theta} lambda={lambda}: {got} vs {reference}"
        );
    }

    // monotonicity on a 50x50 lattice
    let p = ConfidenceParams {
        lambda_per_m: 0.35,
        theta_fov_deg: 79.0,
    };
    let half = p.theta_fov_deg / 2.0;
    let grid: Vec<Vec<f64>> = (0..50)
        .map(|i| {
            (0..50)
                .map(|j| {
                    let d = i as f64 * 10.0 / 49.0;
                    let theta = j as f64 * half / 49.0;
                    confidence(d, theta, &p).unwrap()
                })
                .collect()
        })
        .collect();
    for (i, row) in grid.iter().enumerate() {
        for j in 0..49 {
            assert!(row[j + 1] <= row[j] + 1e-12, "theta monotonicity");
            assert!(grid[j + 1][i] <= grid[j][i] + 1e-12, "distance monotonicity");
        }
    }

    budget(start, Duration::from_secs(1), "criterion 1");
    println!("criterion 1 (confidence model): PASS");
}

// --- criterion 2 --------------------------------------------------------

#[test]
fn criterion_02_fusion() {
    let start = Instant::now();

    // worked examples
    let (v, c) = fuse_cell((0.3, 0.0), (0.8, 0.6), 0.5);
    assert!((v - 0.8).abs() <= 1e-12 && (c - 0.6).abs() <= 1e-12);
    let (v, c) = fuse_cell((0.4, 0.5), (0.8, 0.5), 0.5);
    assert!((v - 0.6).abs() <= 1e-12 && (c - 0.5).abs() <= 1e-12);
    let (v, c) = fuse_cell((0.0, 0.1), (1.0, 0.9), 0.5);
    assert!((v - 0.9).abs() <= 1e-12 && (c - 0.82).abs() <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..20_000 {
        let (v1, c1) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let (v2, c2) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let a = fuse_cell((v1, c1), (v2, c2), 0.5);
        let b = fuse_cell((v2, c2), (v1, c1), 0.5);
        assert!((a.0 - b.0).abs() <= 1e-12, "value symmetry");
        assert!((a.1 - b.1).abs() <= 1e-12, "confidence symmetry");
        if c1 + c2 > 0.0 {
            assert!(a.0 >= v1.min(v2) - 1e-12 && a.0 <= v1.max(v2) + 1e-12, "betweenness");
            assert!(a.1 >= (c1 + c2) / 2.0 - 1e-12, "confidence lower bound");
            assert!(a.1 <= c1.max(c2) + 1e-12, "confidence upper bound");
        }
        let c = rng.gen_range(0.001..=1.0);
        let fixed = fuse_cell((v1, c), (v2, c), 0.5);
        assert!((fixed.1 - c).abs() <= 1e-12, "fixed point at equal confidence");
    }

    budget(start, Duration::from_secs(1), "criterion 2");
    println!("criterion 2 (confidence-weighted fusion): PASS");
}

// --- criterion 3 --------------------------------------------------------

/// Belief map built from random ternary cells via synthetic one-cell scans.
fn random_belief_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ObstacleMap {
    let mut map = ObstacleMap::new(w, h, 0.05).unwrap();
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let cell = Cell::new(x, y);
            let belief = match rng.gen_range(0u8..4) {
                0 => Belief::Occupied,
                1 | 2 => Belief::Free,
                _ => continue,
            };
            let (cx, cy) = cell.center(0.05);
            map.integrate_scan(
                &Pose::new(cx, cy, 0.0),
                &DepthScan {
                    rays: vec![DepthRay {
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

/// Frontier components straight from the definition: per-cell predicate and
/// union-find over 8-adjacency.
fn frontier_components_oracle(map: &ObstacleMap) -> Vec<Vec<Cell>> {
    let mut cells = Vec::new();
    for y in 0..map.height() as i32 {
        for x in 0..map.width() as i32 {
            let c = Cell::new(x, y);
            let free = map.belief(c) == Belief::Free;
            let touches_unknown = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                let n = c.offset(dx, dy);
                map.in_bounds(n) && map.belief(n) == Belief::Unknown
            });
            if free && touches_unknown {
                cells.push(c);
            }
        }
    }
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            if (cells[i].x - cells[j].x).abs() <= 1 && (cells[i].y - cells[j].y).abs() <= 1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Cell>)> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(*cell),
            None => groups.push((root, vec![*cell])),
        }
    }
    let mut out: Vec<Vec<Cell>> = groups
        .into_iter()
        .map(|(_, mut g)| {
            g.sort_by_key(|c| (c.y, c.x));
            g
        })
        .collect();
    out.sort_by_key(|g| (g[0].y, g[0].x));
    out
}

#[test]
fn criterion_03_frontier_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..200 {
        let w = rng.gen_range(4..=32);
        let h = rng.gen_range(4..=32);
        let map = random_belief_map(&mut rng, w, h);
        for min_size in [1usize, 3] {
            let expected: Vec<Vec<Cell>> = frontier_components_oracle(&map)
                .into_iter()
                .filter(|g| g.len() >= min_size)
                .collect();
            let mut got: Vec<Vec<Cell>> = detect_frontiers(&map, min_size)
                .into_iter()
                .map(|f| {
                    assert!(f.cells.contains(&f.midpoint), "midpoint not a member");
                    let mut cells = f.cells;
                    cells.sort_by_key(|c| (c.y, c.x));
                    cells
                })
                .collect();
            got.sort_by_key(|g| (g[0].y, g[0].x));
            assert_eq!(got, expected, "case {case} min_size {min_size}");
        }
    }
    budget(start, Duration::from_secs(30), "criterion 3");
    println!("criterion 3 (frontier oracle equivalence, 200 maps): PASS");
}

// --- criterion 4 --------------------------------------------------------

/// Independent relaxation oracle: spec neighbor rule re-stated here, exact
/// integer step counts for cost comparison.
fn shortest_cost_oracle(
    map: &ObstacleMap,
    start: Cell,
    goal: Cell,
    penalty: f64,
) -> Option<f64> {
    if map.belief(start) != Belief::Free || map.belief(goal) == Belief::Occupied || !map.in_bounds(goal)
    {
        return None;
    }
    let (w, h) = (map.width(), map.height());
    let index = |c: Cell| c.y as usize * w + c.x as usize;
    let neighbors = |c: Cell| {
        let mut out = Vec::new();
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if (dx, dy) == (0, 0) {
                    continue;
                }
                let n = c.offset(dx, dy);
                if !map.in_bounds(n) || map.belief(n) == Belief::Occupied {
                    continue;
                }
                if dx != 0
                    && dy != 0
                    && (map.belief(c.offset(dx, 0)) == Belief::Occupied
                        || map.belief(c.offset(0, dy)) == Belief::Occupied)
                {
                    continue;
                }
                out.push((n, dx != 0 && dy != 0));
            }
        }
        out
    };
    let mut dist: Vec<Option<(f64, StepCounts)>> = vec![None; w * h];
    dist[index(start)] = Some((0.0, StepCounts::default()));
    loop {
        let mut changed = false;
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                let c = Cell::new(x, y);
                let Some((_, counts)) = dist[index(c)] else { continue };
                for (n, diagonal) in neighbors(c) {
                    let unknown = map.belief(n) == Belief::Unknown;
                    let mut nc = counts;
                    match (diagonal, unknown) {
                        (false, false) => nc.known_straight += 1,
                        (true, false) => nc.known_diag += 1,
                        (false, true) => nc.unknown_straight += 1,
                        (true, true) => nc.unknown_diag += 1,
                    }
                    let cost = nc.cost_m(map.resolution(), penalty);
                    if dist[index(n)].map_or(true, |(best, _)| cost < best) {
                        dist[index(n)] = Some((cost, nc));
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

#[test]
fn criterion_04_planner_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut solved = 0;
    for case in 0..100 {
        let w = rng.gen_range(4..=16);
        let h = rng.gen_range(4..=16);
        let map = random_belief_map(&mut rng, w, h);
        let pick = |rng: &mut ChaCha8Rng| {
            Cell::new(rng.gen_range(0..w as i32), rng.gen_range(0..h as i32))
        };
        let (s, g) = (pick(&mut rng), pick(&mut rng));
        if map.belief(s) != Belief::Free || map.belief(g) == Belief::Occupied {
            continue;
        }
        let expected = shortest_cost_oracle(&map, s, g, 2.0);
        match plan_path(&map, s, g, 2.0) {
            Ok(plan) => {
                assert_eq!(Some(plan.cost_m), expected, "case {case}: cost mismatch");
                solved += 1;
                // corner-cut invariant on the produced path
                for pair in plan.cells.windows(2) {
                    let (a, b) = (pair[0], pair[1]);
                    let (dx, dy) = (b.x - a.x, b.y - a.y);
                    assert!(dx.abs() <= 1 && dy.abs() <= 1 && (dx, dy) != (0, 0));
                    assert!(map.belief(b) != Belief::Occupied);
                    if dx != 0 && dy != 0 {
                        assert!(map.belief(a.offset(dx, 0)) != Belief::Occupied);
                        assert!(map.belief(a.offset(0, dy)) != Belief::Occupied);
                    }
                }
            }
            Err(PlanError::Unreachable) => {
                assert_eq!(expected, None, "case {case}: planner gave up too early")
            }
            Err(other) => panic!("case {case}: unexpected error {other}"),
        }
    }
    assert!(solved >= 30, "suite degenerated: only {solved} solvable cases");
    budget(start, Duration::from_secs(30), "criterion 4");
    println!("criterion 4 (planner oracle equivalence, 100 maps): PASS");
}

// --- criterion 5 --------------------------------------------------------

fn synthetic_result(success: bool, p: f64, l: f64) -> EpisodeResult {
    EpisodeResult {
        success,
        steps: 1,
        path_length_m: p,
        shortest_length_m: l,
        termination: if success {
            Termination::StoppedSuccess
        } else {
            Termination::Timeout
        },
        final_pose: Pose::new(0.0, 0.0, 0.0),
        actions: vec![Action::Stop],
        oscillation_events: 0,
        fallback_events: 0,
        advisor_failures: 0,
        goal_phase_entries: 0,
    }
}

#[test]
fn criterion_05_spl_arithmetic() {
    let start = Instant::now();

    let m = compute_metrics(&[synthetic_result(true, 2.0, 2.0)]).unwrap();
    assert_eq!((m.sr, m.spl), (1.0, 1.0));
    let m = compute_metrics(&[synthetic_result(true, 4.0, 2.0)]).unwrap();
    assert_eq!(m.spl, 0.5);
    let m = compute_metrics(&[synthetic_result(false, 1.0, 2.0)]).unwrap();
    assert_eq!((m.sr, m.spl), (0.0, 0.0));

    // any generated batch: per-episode terms in [0,1] and SPL <= SR
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..500 {
        let results: Vec<EpisodeResult> = (0..rng.gen_range(1..40))
            .map(|_| {
                synthetic_result(
                    rng.gen_bool(0.5),
                    rng.gen_range(0.05..40.0),
                    rng.gen_range(0.05..40.0),
                )
            })
            .collect();
        for r in &results {
            let term = r.spl_term();
            assert!((0.0..=1.0).contains(&term), "term {term} out of range");
        }
        let m = compute_metrics(&results).unwrap();
        assert!(m.spl <= m.sr + 1e-12, "SPL {} above SR {}", m.spl, m.sr);
    }

    budget(start, Duration::from_secs(1), "criterion 5");
    println!("criterion 5 (SPL arithmetic): PASS");
}

// --- criterion 6 --------------------------------------------------------

#[test]
fn criterion_06_prompt_parse_roundtrip() {
    let start = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..1000 {
        let scores = ActionScores {
            forward: rng.gen_range(0.0..=1.0),
            backward: rng.gen_range(0.0..=1.0),
            left: rng.gen_range(0.0..=1.0),
            right: rng.gen_range(0.0..=1.0),
        };
        let parsed = parse_scores(&format_scores_response(&scores)).unwrap();
        assert_eq!(parsed, scores, "round trip must be exact");
    }

    // malformed corpus
    let missing = "- Go forward: 0.8\n- Turn right: 0.3\n- Turn left: 0.3";
    assert!(matches!(
        parse_scores(missing),
        Err(ScoreParseError::Missing(_))
    ));
    let duplicate =
        "- Go forward: 0.8\n- Go forward: 0.2\n- Go backward: 0.1\n- Turn right: 0.3\n- Turn left: 0.3";
    assert!(matches!(
        parse_scores(duplicate),
        Err(ScoreParseError::Duplicate(_))
    ));
    let out_of_range =
        "- Go forward: 1.4\n- Go backward: 0.1\n- Turn right: 0.3\n- Turn left: 0.3";
    assert!(matches!(
        parse_scores(out_of_range),
        Err(ScoreParseError::OutOfRange { .. })
    ));
    let prose_only = "I think the couch is probably through the doorway on the left, \
                      past the long corridor.";
    assert!(matches!(
        parse_scores(prose_only),
        Err(ScoreParseError::Missing(_))
    ));
    let non_numeric =
        "- Go forward: high\n- Go backward: 0.1\n- Turn right: 0.3\n- Turn left: 0.3";
    assert!(matches!(
        parse_scores(non_numeric),
        Err(ScoreParseError::NotNumeric(_))
    ));

    budget(start, Duration::from_secs(5), "criterion 6");
    println!("criterion 6 (prompt/parse round trip): PASS");
}

// --- criteria 7-9 share the seeded suites --------------------------------

fn sigma_zero() -> NavConfig {
    let mut cfg = NavConfig::standard();
    cfg.detector.sigma = 0.0;
    cfg
}

fn rooms_suite(count: usize) -> Vec<LoadedEpisode> {
    let params = RoomsParams {
        seed: 20250809,
        width: 260,
        height: 180,
        rooms: 9,
        ..RoomsParams::default()
    };
    (0..count)
        .map(|i| {
            let s = rooms_scenario(&params, i).expect("suite generation");
            let world = s.world().expect("suite maps parse");
            let spec = EpisodeSpec::new(s.target.clone(), s.start, s.seed);
            LoadedEpisode {
                id: s.id,
                world,
                spec,
            }
        })
        .collect()
}

#[test]
fn criterion_07_oracle_vs_random_separation() {
    let start = Instant::now();
    let episodes = rooms_suite(50);
    let cfg = sigma_zero();
    let remote = RemoteConfig::default();

    let oracle = run_batch(&episodes, AdvisorKind::Oracle, &remote, &cfg, None, |_| {}).unwrap();
    let random = run_batch(&episodes, AdvisorKind::Random, &remote, &cfg, None, |_| {}).unwrap();
    assert!(oracle.invalid.is_empty() && random.invalid.is_empty());
    let om = oracle.metrics.unwrap();
    let rm = random.metrics.unwrap();

    println!(
        "criterion 7 data: oracle SR {:.3} SPL {:.3} | random SR {:.3} SPL {:.3}",
        om.sr, om.spl, rm.sr, rm.spl
    );
    assert!(om.sr >= 0.9, "oracle SR {} below 0.9", om.sr);
    assert!(
        om.sr - rm.sr >= 0.15,
        "SR separation {} below 0.15",
        om.sr - rm.sr
    );
    assert!(om.spl > rm.spl, "oracle SPL must strictly exceed random SPL");

    budget(start, Duration::from_secs(300), "criterion 7");
    println!("criterion 7 (oracle vs random separation): PASS");
}

// --- criterion 8 --------------------------------------------------------

/// Memoryless adversarial guidance: a restoring heading seesaw that makes
/// frontier priorities ping-pong at the twin junction.
struct SeesawAdvisor;

impl Advisor for SeesawAdvisor {
    fn advise(
        &mut self,
        _req: &AdvisorRequest,
        env: &AdvisorEnv<'_>,
    ) -> Result<ActionScores, AdvisorError> {
        let heading = env.pose.heading_deg.rem_euclid(360.0);
        let (left, right) = if (15.0..195.0).contains(&heading) {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        };
        Ok(ActionScores {
            forward: 0.3,
            backward: 0.2,
            left,
            right,
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

#[test]
fn criterion_08_history_ablation() {
    let start = Instant::now();

    let scenarios: Vec<_> = (0..20).map(|i| twin_scenario(4242, i).unwrap()).collect();
    let run_arm = |history_enabled: bool| -> (usize, usize) {
        let mut cfg = sigma_zero();
        cfg.history.enabled = history_enabled;
        // the fixture re-prioritizes frontiers at every step
        cfg.planner.reselect_margin = 0.0;
        let mut timeouts = 0;
        let mut successes = 0;
        for s in &scenarios {
            let world = s.world().unwrap();
            let spec = EpisodeSpec::new(s.target.clone(), s.start, s.seed);
            let result = run_episode(&world, &spec, &mut SeesawAdvisor, &cfg).unwrap();
            if result.termination == Termination::Timeout {
                timeouts += 1;
            }
            if result.success {
                successes += 1;
            }
        }
        (timeouts, successes)
    };

    let (timeouts_on, successes_on) = run_arm(true);
    let (timeouts_off, successes_off) = run_arm(false);
    println!(
        "criterion 8 data: with history {successes_on}/20 success, {timeouts_on} timeouts; \
         without history {successes_off}/20 success, {timeouts_off} timeouts"
    );
    assert!(
        2 * timeouts_on <= timeouts_off,
        "history must cut timeouts by half or better: {timeouts_on} vs {timeouts_off}"
    );
    assert!(
        successes_on > successes_off,
        "history must raise SR: {successes_on} vs {successes_off}"
    );

    budget(start, Duration::from_secs(120), "criterion 8");
    println!("criterion 8 (history ablation on twin corridors): PASS");
}

// --- criterion 9 --------------------------------------------------------

#[test]
fn criterion_09_determinism_and_replay() {
    let start = Instant::now();

    let params = RoomsParams {
        seed: 909,
        width: 160,
        height: 120,
        rooms: 6,
        ..RoomsParams::default()
    };
    let cfg = sigma_zero();
    for index in 0..50 {
        let s = rooms_scenario(&params, index).unwrap();
        let world = s.world().unwrap();
        let mut spec = EpisodeSpec::new(s.target.clone(), s.start, s.seed);
        spec.max_steps = 120;
        let first = run_episode(&world, &spec, &mut OracleAdvisor::new(), &cfg).unwrap();
        let second = run_episode(&world, &spec, &mut OracleAdvisor::new(), &cfg).unwrap();

        assert_eq!(first.steps, second.steps, "step count must replay exactly");
        assert_eq!(
            first.path_length_m.to_bits(),
            second.path_length_m.to_bits(),
            "path length must replay bit-exactly"
        );
        assert_eq!(first.actions, second.actions);
        assert_eq!(first.final_pose.x.to_bits(), second.final_pose.x.to_bits());
        assert_eq!(first.final_pose.y.to_bits(), second.final_pose.y.to_bits());
        assert_eq!(
            first.final_pose.heading_deg.to_bits(),
            second.final_pose.heading_deg.to_bits()
        );

        // the logged action sequence alone reproduces the final pose
        let replayed = replay_actions(&world, &spec.start, &first.actions);
        assert_eq!(replayed.x.to_bits(), first.final_pose.x.to_bits());
        assert_eq!(replayed.y.to_bits(), first.final_pose.y.to_bits());
        assert_eq!(
            replayed.heading_deg.to_bits(),
            first.final_pose.heading_deg.to_bits()
        );
    }

    budget(start, Duration::from_secs(60), "criterion 9");
    println!("criterion 9 (determinism and replay, 50 episodes): PASS");
}

// --- criterion 10 -------------------------------------------------------

/// Open hall with the couch a configurable distance east of the start.
fn gating_fixture(distance_m: f64) -> (objnav_core::world::GridWorld, Pose) {
    let mut rows: Vec<String> = Vec::new();
    for y in 0..9 {
        let row: String = (0..120)
            .map(|x| {
                if x == 0 || y == 0 || x == 119 || y == 8 {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        rows.push(row);
    }
    rows[4].replace_range(110..111, "C");
    let world = load_world(&format!("category C = couch\n\n{}\n", rows.join("\n"))).unwrap();
    let couch = Cell::new(110, 4).center(world.resolution());
    let start = Pose::new(couch.0 - distance_m, couch.1, 0.0);
    (world, start)
}

#[test]
fn criterion_10_goal_phase_gating() {
    let start = Instant::now();

    let cfg = sigma_zero();
    // base - alpha*d: 0.79 at 2.625 m, 0.81 at 2.375 m
    let (world_low, pose_low) = gating_fixture(2.625);
    let (world_high, pose_high) = gating_fixture(2.375);

    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let det = simulate_detection(
            &world_low,
            &pose_low,
            "couch",
            &cfg.detector,
            &cfg.sensor,
            &mut rng,
        )
        .expect("couch is visible at 2.625 m");
        assert!((det.confidence - 0.79).abs() < 1e-9);
        let passes_gate = det.confidence > cfg.detector.threshold;
        assert!(!passes_gate, "0.79 must never pass the 0.8 gate");

        let det = simulate_detection(
            &world_high,
            &pose_high,
            "couch",
            &cfg.detector,
            &cfg.sensor,
            &mut rng,
        )
        .expect("couch is visible at 2.375 m");
        assert!((det.confidence - 0.81).abs() < 1e-9);
        assert!(det.confidence > cfg.detector.threshold, "0.81 must pass");
    }

    // full-episode checks: the sub-threshold fixture never enters the goal
    // phase within the initialization spin plus one decision; the
    // above-threshold fixture enters immediately and succeeds
    for seed in 0..5u64 {
        let mut spec = EpisodeSpec::new("couch", pose_low, seed);
        spec.max_steps = 13;
        let r = run_episode(&world_low, &spec, &mut OracleAdvisor::new(), &cfg).unwrap();
        assert_eq!(r.goal_phase_entries, 0, "0.79 fixture entered the goal phase");

        let spec = EpisodeSpec::new("couch", pose_high, seed);
        let r = run_episode(&world_high, &spec, &mut OracleAdvisor::new(), &cfg).unwrap();
        assert!(r.goal_phase_entries >= 1, "0.81 fixture must enter the goal phase");
        assert!(r.success, "0.81 fixture must reach the couch");
    }

    budget(start, Duration::from_secs(10), "criterion 10");
    println!("criterion 10 (goal-phase gating at the 0.8 threshold): PASS");
}
