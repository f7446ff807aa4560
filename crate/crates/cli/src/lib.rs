//! Config parsing and episode driving behind the `fbsim` binary.
//!
//! A config is a TOML file. Top-level keys are `seeds`, `snapshots`, `dt`,
//! `out` and `label`; the sections `region`, `users`, `mobility`,
//! `obstacles`, `channel`, `placement`, `energy` and `fleet` mirror the
//! structs of `fbs-core`. Every key is optional and unknown keys are errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fbs_core::channel::Environment;
use fbs_core::metrics::{
    aggregate, collect_metrics, emit_figure_data, write_waypoints, MetricsReport,
};
use fbs_core::placement::PlacementParams;
use fbs_core::scenario::{MobilityMix, ObstacleParams, Region, UserParams};
use fbs_core::simulation::{run_episode, FleetParams, Scenario, SimConfig};
use fbs_core::trajectory::EnergyModel;
use serde::Deserialize;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ABORTED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default = "default_snapshots")]
    snapshots: usize,
    dt: Option<f64>,
    #[serde(default = "default_out")]
    out: PathBuf,
    label: Option<String>,
    #[serde(default)]
    region: Region,
    #[serde(default)]
    users: UserParams,
    #[serde(default)]
    mobility: MobilityMix,
    #[serde(default)]
    obstacles: ObstacleParams,
    #[serde(default)]
    channel: Environment,
    #[serde(default)]
    placement: PlacementParams,
    #[serde(default)]
    energy: EnergyModel,
    #[serde(default)]
    fleet: FleetParams,
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_snapshots() -> usize {
    SimConfig::default().snapshots
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub path: PathBuf,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub label: String,
    pub sim: SimConfig,
}

/// Short names accepted by `--override` next to full dotted keys.
const ALIASES: [(&str, &str); 7] = [
    ("spacing", "placement.candidate_spacing"),
    ("psi", "placement.psi"),
    ("mass", "energy.mass"),
    ("recharge_rate", "fleet.recharge_rate"),
    ("safety_radius", "fleet.safety_radius"),
    ("velocity", "fleet.v_fbs"),
    ("users", "users.count"),
];

fn apply_override(table: &mut toml::Table, spec: &str) -> anyhow::Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("override {spec:?} is not key=value"))?;
    let key = key.trim();
    let key = ALIASES
        .iter()
        .find(|(a, _)| *a == key)
        .map_or(key, |(_, full)| *full);
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("override {key}: {p} is not a section"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses and validates a config text; `overrides` are `key=value` pairs
/// applied before validation.
pub fn parse_config_str(
    text: &str,
    path: &Path,
    overrides: &[String],
) -> anyhow::Result<RunConfig> {
    let mut table: toml::Table =
        toml::from_str(text).with_context(|| format!("{}", path.display()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let file: ConfigFile = table
        .try_into()
        .with_context(|| format!("{}: schema error", path.display()))?;
    if file.seeds.is_empty() {
        bail!("{}: seed list is empty", path.display());
    }
    let sim = SimConfig {
        snapshots: file.snapshots,
        dt: file.dt,
        region: file.region,
        users: file.users,
        mobility: file.mobility,
        obstacles: file.obstacles,
        channel: file.channel,
        placement: file.placement,
        energy: file.energy,
        fleet: file.fleet,
    };
    sim.validate()
        .with_context(|| format!("{}", path.display()))?;
    Ok(RunConfig {
        path: path.to_path_buf(),
        seeds: file.seeds,
        out: file.out,
        label: file
            .label
            .unwrap_or_else(|| format!("users={}", sim.users.count)),
        sim,
    })
}

pub fn parse_config(path: &Path, overrides: &[String]) -> anyhow::Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config_str(&text, path, overrides)
}

/// Outcome of [`run`]: the per-seed reports and the first abort, if any.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<MetricsReport>,
    pub aborted: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.aborted.is_some() {
            EXIT_ABORTED
        } else {
            EXIT_OK
        }
    }
}

/// Runs one episode per seed and writes, under `cfg.out`:
/// `episodes/seed_<s>.json` (metric series), `episodes/seed_<s>/waypoints/
/// snapshot_<k>.csv`, the figure CSVs and `summary.json`. Aborted episodes
/// are listed in `aborted.txt`.
pub fn run(cfg: &RunConfig) -> anyhow::Result<RunOutcome> {
    let config_text = serde_json::to_string(&cfg.sim)?;
    let episodes = cfg.out.join("episodes");
    std::fs::create_dir_all(&episodes)
        .with_context(|| format!("cannot create {}", episodes.display()))?;
    let mut reports = Vec::new();
    let mut aborted: Vec<String> = Vec::new();
    for &seed in &cfg.seeds {
        let sc =
            Scenario::generate(&cfg.sim, seed).with_context(|| format!("seed {seed}: scenario"))?;
        let tl = run_episode(&sc, &cfg.sim).with_context(|| format!("seed {seed}"))?;
        if let Some(r) = &tl.aborted {
            aborted.push(format!("seed {seed}: {r}"));
        }
        if tl.snapshots.is_empty() {
            continue;
        }
        let report = collect_metrics(&tl, &cfg.label, &config_text)?;
        let path = episodes.join(format!("seed_{seed}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        let wp = episodes.join(format!("seed_{seed}")).join("waypoints");
        std::fs::create_dir_all(&wp).with_context(|| format!("cannot create {}", wp.display()))?;
        for s in &tl.snapshots {
            write_waypoints(
                &tl,
                s.index,
                &wp.join(format!("snapshot_{:03}.csv", s.index)),
            )?;
        }
        reports.push(report);
    }
    let summary = if reports.is_empty() {
        vec![]
    } else {
        vec![aggregate(&reports)?]
    };
    emit_figure_data(&summary, &cfg.out)?;
    let flag = cfg.out.join("aborted.txt");
    if aborted.is_empty() {
        if flag.exists() {
            std::fs::remove_file(&flag)
                .with_context(|| format!("cannot remove {}", flag.display()))?;
        }
    } else {
        std::fs::write(&flag, aborted.join("\n") + "\n")
            .with_context(|| format!("cannot write {}", flag.display()))?;
    }
    Ok(RunOutcome {
        reports,
        aborted: aborted.into_iter().next(),
    })
}

/// Dry run: builds the scenario of the first seed and describes it.
pub fn validate(cfg: &RunConfig) -> anyhow::Result<String> {
    let seed = cfg.seeds[0];
    let sc =
        Scenario::generate(&cfg.sim, seed).with_context(|| format!("seed {seed}: scenario"))?;
    let dt = cfg.sim.interval()?;
    Ok(format!(
        "{}: {} seeds, {} snapshots of {:.2} s, {} users, {} obstacles, {} candidates",
        cfg.path.display(),
        cfg.seeds.len(),
        cfg.sim.snapshots,
        dt,
        sc.users.len(),
        sc.obstacles.len(),
        sc.candidates.len()
    ))
}
