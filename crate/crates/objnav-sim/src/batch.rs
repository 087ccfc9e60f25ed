//! Scenario manifests, per-episode records, and batch evaluation.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use objnav_core::advisor::{Advisor, AdvisorKind, OracleAdvisor, RandomAdvisor};
use objnav_core::mapfile::load_world;
use objnav_core::runner::{
    compute_metrics, run_episode, EpisodeResult, EpisodeSpec, Metrics, NavConfig,
};
use objnav_core::world::{GridWorld, Pose};
use serde::{Deserialize, Serialize};

use crate::config::RemoteConfig;
use crate::mazegen::splitmix64;
use crate::remote::RemoteAdvisor;

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

/// One manifest line.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Map path, relative to the manifest file.
    pub map: String,
    pub target: String,
    pub seed: u64,
    #[serde(default)]
    pub start: Option<StartPose>,
    #[serde(default)]
    pub max_steps: Option<u32>,
}

/// A manifest entry with its world loaded and the spec resolved.
pub struct LoadedEpisode {
    pub id: String,
    pub world: GridWorld,
    pub spec: EpisodeSpec,
}

/// Load a JSONL manifest, resolving map paths and spawn poses.
pub fn load_manifest(path: &Path, default_max_steps: u32, success_radius_m: f64) -> Result<Vec<LoadedEpisode>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut episodes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(line)
            .with_context(|| format!("manifest line {}", lineno + 1))?;
        let map_path = base.join(&entry.map);
        let map_text = std::fs::read_to_string(&map_path)
            .with_context(|| format!("reading map {}", map_path.display()))?;
        let world = load_world(&map_text)
            .map_err(|e| anyhow::anyhow!("map {}: {e}", map_path.display()))?;
        let start = match &entry.start {
            Some(p) => Pose::new(p.x, p.y, p.heading_deg),
            None => *world
                .spawns()
                .first()
                .ok_or_else(|| anyhow::anyhow!("map {} has no spawn", map_path.display()))?,
        };
        let mut spec = EpisodeSpec::new(entry.target.clone(), start, entry.seed);
        spec.max_steps = entry.max_steps.unwrap_or(default_max_steps);
        spec.success_radius_m = success_radius_m;
        episodes.push(LoadedEpisode {
            id: entry.id,
            world,
            spec,
        });
    }
    if episodes.is_empty() {
        bail!("manifest {} holds no episodes", path.display());
    }
    Ok(episodes)
}

/// One structured line per episode.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct EpisodeRecord {
    pub id: String,
    pub seed: u64,
    pub target: String,
    pub success: bool,
    pub steps: u32,
    pub path_length_m: f64,
    pub shortest_length_m: f64,
    pub termination: String,
    pub oscillation_events: u32,
    pub fallback_events: u32,
    pub advisor_failures: u32,
}

impl EpisodeRecord {
    pub fn from_result(id: &str, seed: u64, target: &str, r: &EpisodeResult) -> Self {
        Self {
            id: id.to_string(),
            seed,
            target: target.to_string(),
            success: r.success,
            steps: r.steps,
            path_length_m: r.path_length_m,
            shortest_length_m: r.shortest_length_m,
            termination: r.termination.as_str().to_string(),
            oscillation_events: r.oscillation_events,
            fallback_events: r.fallback_events,
            advisor_failures: r.advisor_failures,
        }
    }
}

/// Builds one advisor per episode.
pub fn make_advisor(
    kind: AdvisorKind,
    remote: &RemoteConfig,
    seed: u64,
) -> Result<Box<dyn Advisor>> {
    Ok(match kind {
        AdvisorKind::Oracle => Box::new(OracleAdvisor::new()),
        AdvisorKind::Random => Box::new(RandomAdvisor::new(seed)),
        AdvisorKind::Remote => Box::new(RemoteAdvisor::new(remote.clone())?),
    })
}

pub struct BatchOutcome {
    pub records: Vec<EpisodeRecord>,
    pub results: Vec<EpisodeResult>,
    pub metrics: Option<Metrics>,
    /// Episodes excluded as invalid (unreachable target or bad spec).
    pub invalid: Vec<(String, String)>,
}

/// Run a batch sequentially and deterministically. `seed_salt` (when given)
/// mixes into every episode seed so one manifest can back distinct runs.
pub fn run_batch(
    episodes: &[LoadedEpisode],
    kind: AdvisorKind,
    remote: &RemoteConfig,
    cfg: &NavConfig,
    seed_salt: Option<u64>,
    mut on_record: impl FnMut(&EpisodeRecord),
) -> Result<BatchOutcome> {
    if episodes.is_empty() {
        bail!("batch holds no episodes");
    }
    let mut records = Vec::new();
    let mut results = Vec::new();
    let mut invalid = Vec::new();
    for ep in episodes {
        let mut spec = ep.spec.clone();
        if let Some(salt) = seed_salt {
            spec.seed = splitmix64(spec.seed ^ salt);
        }
        let mut advisor = make_advisor(kind, remote, spec.seed)?;
        match run_episode(&ep.world, &spec, advisor.as_mut(), cfg) {
            Ok(result) => {
                let record = EpisodeRecord::from_result(&ep.id, spec.seed, &spec.target, &result);
                on_record(&record);
                records.push(record);
                results.push(result);
            }
            Err(e) => invalid.push((ep.id.clone(), e.to_string())),
        }
    }
    let metrics = compute_metrics(&results);
    Ok(BatchOutcome {
        records,
        results,
        metrics,
        invalid,
    })
}

/// Append records as JSON lines.
pub fn write_records(out: &mut dyn Write, records: &[EpisodeRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Human-readable metrics table.
pub fn format_metrics_table(outcome: &BatchOutcome) -> String {
    use std::collections::BTreeMap;
    let mut out = String::new();
    let episodes = outcome.records.len();
    out.push_str(&format!(
        "episodes {:>5}   invalid {}\n",
        episodes,
        outcome.invalid.len()
    ));
    if let Some(m) = outcome.metrics {
        out.push_str(&format!("SR  {:>7.3}\nSPL {:>7.3}\n", m.sr, m.spl));
    }
    let mut by_termination: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &outcome.records {
        *by_termination.entry(r.termination.as_str()).or_default() += 1;
    }
    let listing: Vec<String> = by_termination
        .iter()
        .map(|(k, v)| format!("{k} {v}"))
        .collect();
    out.push_str(&format!("terminations: {}\n", listing.join(", ")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mazegen::{rooms_scenario, write_scenario_set, RoomsParams};

    fn small_suite(dir: &Path, count: usize) -> std::path::PathBuf {
        let params = RoomsParams {
            width: 120,
            height: 90,
            rooms: 4,
            seed: 3,
            ..RoomsParams::default()
        };
        let scenarios: Vec<_> = (0..count)
            .map(|i| rooms_scenario(&params, i).unwrap())
            .collect();
        write_scenario_set(dir, &scenarios).unwrap()
    }

    #[test]
    fn manifest_roundtrip_and_batch_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = small_suite(dir.path(), 3);
        let episodes = load_manifest(&manifest, 200, 1.0).unwrap();
        assert_eq!(episodes.len(), 3);

        let mut cfg = NavConfig::standard();
        cfg.detector.sigma = 0.0;
        let remote = RemoteConfig::default();
        let a = run_batch(&episodes, AdvisorKind::Oracle, &remote, &cfg, None, |_| {}).unwrap();
        let b = run_batch(&episodes, AdvisorKind::Oracle, &remote, &cfg, None, |_| {}).unwrap();
        assert_eq!(a.records, b.records);
        assert!(a.invalid.is_empty());
        assert!(a.metrics.is_some());

        // salting perturbs seeds deterministically
        let c = run_batch(
            &episodes,
            AdvisorKind::Random,
            &remote,
            &cfg,
            Some(5),
            |_| {},
        )
        .unwrap();
        let d = run_batch(
            &episodes,
            AdvisorKind::Random,
            &remote,
            &cfg,
            Some(5),
            |_| {},
        )
        .unwrap();
        assert_eq!(c.records, d.records);
    }

    #[test]
    fn records_serialize_one_line_each() {
        let record = EpisodeRecord {
            id: "ep1".into(),
            seed: 9,
            target: "couch".into(),
            success: true,
            steps: 40,
            path_length_m: 2.5,
            shortest_length_m: 2.0,
            termination: "stopped-success".into(),
            oscillation_events: 0,
            fallback_events: 0,
            advisor_failures: 0,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[record.clone(), record]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let parsed: EpisodeRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(parsed.steps, 40);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let cfg = NavConfig::standard();
        let remote = RemoteConfig::default();
        assert!(run_batch(&[], AdvisorKind::Oracle, &remote, &cfg, None, |_| {}).is_err());
    }
}
