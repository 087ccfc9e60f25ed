use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use objnav_core::advisor::AdvisorKind;
use objnav_core::mapfile::load_world;
use objnav_core::mapper::ObstacleMap;
use objnav_core::runner::{
    run_episode_observed, EpisodeResult, EpisodeSpec, NavConfig, StepObserver, StepSnapshot,
};
use objnav_core::valuemap::ValueMap;
use objnav_core::world::{GridWorld, Pose};
use objnav_sim::batch::{self, load_manifest, make_advisor, run_batch};
use objnav_sim::config::RunConfig;
use objnav_sim::mazegen::{rooms_scenario, twin_scenario, write_scenario_set, RoomsParams};
use objnav_sim::snapshot::{write_layers, SnapshotObserver};

/// Frontier-exploration object-goal navigation simulator.
#[derive(Parser)]
#[command(name = "objnav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode on one map.
    Run(RunArgs),
    /// Run a scenario manifest and report SR/SPL.
    Bench(BenchArgs),
    /// Run one episode, exporting per-step obstacle/value rasters.
    Render(RenderArgs),
    /// Generate seeded scenario sets.
    Gen(GenArgs),
}

#[derive(Args)]
struct CommonEpisodeArgs {
    /// Map document path.
    #[arg(long)]
    map: PathBuf,
    /// Target object category.
    #[arg(long)]
    target: String,
    /// Advisor implementation: oracle | random | remote.
    #[arg(long, default_value = "oracle")]
    advisor: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step budget (config default when omitted).
    #[arg(long)]
    max_steps: Option<u32>,
    /// Run config TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start pose `x,y,heading` in meters/degrees (first spawn when omitted).
    #[arg(long)]
    start: Option<String>,
    /// Override the history module: on | off.
    #[arg(long)]
    history: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    episode: CommonEpisodeArgs,
    /// Export final belief/value rasters here.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario manifest (JSON lines).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "oracle")]
    advisor: String,
    /// Salt mixed into every episode seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write per-episode records (JSON lines) here.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    history: Option<String>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    episode: CommonEpisodeArgs,
    /// Output directory for the per-step rasters.
    #[arg(long)]
    out_dir: PathBuf,
    /// Export every Nth step.
    #[arg(long, default_value_t = 1)]
    every: u32,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory (receives maps/ and manifest.jsonl).
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// rooms | twin
    #[arg(long, default_value = "rooms")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "couch")]
    target: String,
    /// Map width in meters (rooms kind).
    #[arg(long, default_value_t = 10.0)]
    width_m: f64,
    /// Map height in meters (rooms kind).
    #[arg(long, default_value_t = 7.0)]
    height_m: f64,
    /// Room count (rooms kind).
    #[arg(long, default_value_t = 7)]
    rooms: usize,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Render(args) => cmd_render(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn apply_history_override(cfg: &mut NavConfig, flag: &Option<String>) -> Result<()> {
    if let Some(v) = flag {
        match v.as_str() {
            "on" => cfg.history.enabled = true,
            "off" => cfg.history.enabled = false,
            other => bail!("--history must be on or off, got {other}"),
        }
    }
    Ok(())
}

fn parse_start(world: &GridWorld, flag: &Option<String>) -> Result<Pose> {
    match flag {
        Some(text) => {
            let parts: Vec<&str> = text.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                bail!("--start expects x,y,heading");
            }
            Ok(Pose::new(
                parts[0].parse().context("start x")?,
                parts[1].parse().context("start y")?,
                parts[2].parse().context("start heading")?,
            ))
        }
        None => world
            .spawns()
            .first()
            .copied()
            .ok_or_else(|| anyhow::anyhow!("map has no spawn; pass --start x,y,heading")),
    }
}

fn episode_pieces(
    args: &CommonEpisodeArgs,
) -> Result<(GridWorld, EpisodeSpec, NavConfig, RunConfig, AdvisorKind)> {
    let run_cfg = load_config(&args.config)?;
    let mut nav = run_cfg.nav_config();
    apply_history_override(&mut nav, &args.history)?;
    let kind: AdvisorKind = args
        .advisor
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let map_text = std::fs::read_to_string(&args.map)
        .with_context(|| format!("reading map {}", args.map.display()))?;
    let world = load_world(&map_text).map_err(|e| anyhow::anyhow!("{e}"))?;
    let start = parse_start(&world, &args.start)?;
    let mut spec = EpisodeSpec::new(args.target.clone(), start, args.seed);
    spec.max_steps = args.max_steps.unwrap_or(run_cfg.episode.max_steps);
    spec.success_radius_m = run_cfg.episode.success_radius_m;
    Ok((world, spec, nav, run_cfg, kind))
}

fn print_result(id: &str, result: &EpisodeResult) {
    println!(
        "{id}: success={} steps={} path={:.3} m shortest={:.3} m termination={} \
         oscillations={} fallbacks={} advisor_failures={}",
        result.success,
        result.steps,
        result.path_length_m,
        result.shortest_length_m,
        result.termination.as_str(),
        result.oscillation_events,
        result.fallback_events,
        result.advisor_failures,
    );
}

/// Keeps the last belief/value layers for an end-of-run export.
struct FinalState {
    maps: Option<(ObstacleMap, ValueMap)>,
}

impl StepObserver for FinalState {
    fn on_step(&mut self, s: &StepSnapshot<'_>) {
        self.maps = Some((s.obstacle_map.clone(), s.value_map.clone()));
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let (world, spec, nav, run_cfg, kind) = episode_pieces(&args.episode)?;
    let mut advisor = make_advisor(kind, &run_cfg.remote, spec.seed)?;
    let mut observer = FinalState { maps: None };
    let result = run_episode_observed(&world, &spec, advisor.as_mut(), &nav, &mut observer)?;
    print_result("episode", &result);
    if let Some(dir) = &args.snapshot_dir {
        if let Some((map, vm)) = &observer.maps {
            write_layers(dir, "final", map, vm)?;
            println!("final rasters in {}", dir.display());
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let run_cfg = load_config(&args.config)?;
    let mut nav = run_cfg.nav_config();
    apply_history_override(&mut nav, &args.history)?;
    let kind: AdvisorKind = args
        .advisor
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let episodes = load_manifest(
        &args.manifest,
        args.max_steps.unwrap_or(run_cfg.episode.max_steps),
        run_cfg.episode.success_radius_m,
    )?;
    let outcome = run_batch(&episodes, kind, &run_cfg.remote, &nav, args.seed, |_| {})?;
    for (id, reason) in &outcome.invalid {
        eprintln!("invalid episode {id}: {reason}");
    }
    if let Some(path) = &args.records {
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        batch::write_records(&mut file, &outcome.records)?;
        file.flush()?;
        println!("records in {}", path.display());
    }
    print!("{}", batch::format_metrics_table(&outcome));
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let (world, spec, nav, run_cfg, kind) = episode_pieces(&args.episode)?;
    let mut advisor = make_advisor(kind, &run_cfg.remote, spec.seed)?;
    let mut observer = SnapshotObserver::new(args.out_dir.clone(), args.every);
    let result = run_episode_observed(&world, &spec, advisor.as_mut(), &nav, &mut observer)?;
    if let Some(e) = observer.error {
        return Err(e);
    }
    print_result("episode", &result);
    println!("rasters in {}", args.out_dir.display());
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    if args.count == 0 {
        bail!("--count must be positive");
    }
    let scenarios: Result<Vec<_>> = match args.kind.as_str() {
        "rooms" => {
            let params = RoomsParams {
                width: (args.width_m / 0.05).round() as usize,
                height: (args.height_m / 0.05).round() as usize,
                rooms: args.rooms,
                target: args.target.clone(),
                seed: args.seed,
            };
            (0..args.count).map(|i| rooms_scenario(&params, i)).collect()
        }
        "twin" => (0..args.count).map(|i| twin_scenario(args.seed, i)).collect(),
        other => bail!("unknown kind {other}; expected rooms or twin"),
    };
    let manifest = write_scenario_set(&args.out_dir, &scenarios?)?;
    println!("manifest at {}", manifest.display());
    Ok(())
}
