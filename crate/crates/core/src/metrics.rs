//! Per-episode metric series, cross-replication summaries and the CSV/JSON
//! files behind the result figures.
//!
//! Standard deviations are population deviations (divide by n).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::EpisodeTimeline;

/// Metrics with a figure file of their own, in file order.
pub const FIGURE_METRICS: [&str; 5] = [
    "fbs_count",
    "dist_per_user",
    "energy_per_fbs",
    "solve_time",
    "rate_per_fbs",
];

/// Header of every figure CSV.
pub const FIGURE_HEADER: [&str; 5] = ["scenario", "users", "replications", "mean", "std_pop"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat {
                mean: 0.0,
                std: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Stat {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub users: usize,
    /// Canonical text of the configuration; reports only aggregate when it
    /// matches.
    pub config: String,
    pub seed: u64,
    /// One value per snapshot for each metric.
    pub series: BTreeMap<String, Vec<f64>>,
    pub summary: BTreeMap<String, Stat>,
    pub aborted: Option<String>,
}

/// Metric series of one episode.
///
/// Per snapshot: placed FBS count, distance flown divided by the user count,
/// energy spent divided by the FBS count, assignment solve time, and served
/// demand divided by the FBS count. Graph build and placement times and the
/// number of unreached hovering points are kept as extra series.
pub fn collect_metrics(
    tl: &EpisodeTimeline,
    scenario: &str,
    config: &str,
) -> Result<MetricsReport> {
    if tl.snapshots.is_empty() {
        return Err(Error::InvalidInput("timeline has no snapshots".into()));
    }
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut push = |k: &str, v: f64| series.entry(k.to_string()).or_default().push(v);
    for s in &tl.snapshots {
        let n = s.fbs_count().max(1) as f64;
        push("fbs_count", s.fbs_count() as f64);
        push("dist_per_user", s.distance_flown / s.users.max(1) as f64);
        push("energy_per_fbs", s.energy_spent / n);
        push("solve_time", s.solve_time);
        push("rate_per_fbs", s.served_demand / n);
        push("graph_time", s.graph_time);
        push("placement_time", s.placement_time);
        push("unserved_points", s.unserved_points as f64);
    }
    let summary = series
        .iter()
        .map(|(k, v)| (k.clone(), Stat::of(v)))
        .collect();
    Ok(MetricsReport {
        scenario: scenario.to_string(),
        users: tl.snapshots[0].users,
        config: config.to_string(),
        seed: tl.seed,
        series,
        summary,
        aborted: tl.aborted.clone(),
    })
}

/// One scenario across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub users: usize,
    pub replications: usize,
    /// Mean and population deviation of the per-episode means.
    pub metrics: BTreeMap<String, Stat>,
}

/// Combines replications of a single configuration.
pub fn aggregate(reports: &[MetricsReport]) -> Result<SummaryRow> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidInput("no reports to aggregate".into()))?;
    if let Some(r) = reports
        .iter()
        .find(|r| r.config != first.config || r.scenario != first.scenario)
    {
        return Err(Error::InvalidInput(format!(
            "reports of scenario {} (seed {}) and {} (seed {}) use different configurations",
            first.scenario, first.seed, r.scenario, r.seed
        )));
    }
    let mut metrics = BTreeMap::new();
    for key in first.summary.keys() {
        // Sort so the sums do not depend on report order.
        let mut means: Vec<f64> = reports
            .iter()
            .map(|r| r.summary.get(key).map_or(f64::NAN, |s| s.mean))
            .collect();
        means.sort_by(f64::total_cmp);
        metrics.insert(key.clone(), Stat::of(&means));
    }
    Ok(SummaryRow {
        scenario: first.scenario.clone(),
        users: first.users,
        replications: reports.len(),
        metrics,
    })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `<metric>.csv` for each figure metric plus `summary.json`.
pub fn emit_figure_data(summary: &[SummaryRow], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    for metric in FIGURE_METRICS {
        let path = out_dir.join(format!("{metric}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(FIGURE_HEADER)
            .map_err(|e| io_err(&path, e))?;
        for row in summary {
            let s = row.metrics.get(metric).copied().unwrap_or(Stat {
                mean: f64::NAN,
                std: f64::NAN,
            });
            w.write_record([
                row.scenario.clone(),
                row.users.to_string(),
                row.replications.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
            ])
            .map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }
    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(|e| io_err(&path, e))?;
    std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    Ok(())
}

/// Reads back one figure CSV as `(scenario, users, replications, stat)`.
pub fn read_figure_csv(path: &Path) -> Result<Vec<(String, usize, usize, Stat)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let field = |k: usize| {
            rec.get(k)
                .ok_or_else(|| io_err(path, format!("missing column {k}")))
        };
        let num = |k: usize| -> Result<f64> { field(k)?.parse().map_err(|e| io_err(path, e)) };
        out.push((
            field(0)?.to_string(),
            field(1)?.parse().map_err(|e| io_err(path, e))?,
            field(2)?.parse().map_err(|e| io_err(path, e))?,
            Stat {
                mean: num(3)?,
                std: num(4)?,
            },
        ));
    }
    Ok(out)
}

/// Route waypoints of every leg of one snapshot: `fbs_id, seq, x, y, z`.
pub fn write_waypoints(tl: &EpisodeTimeline, snapshot: usize, path: &Path) -> Result<()> {
    let rec = tl
        .snapshots
        .iter()
        .find(|s| s.index == snapshot)
        .ok_or_else(|| Error::InvalidInput(format!("no snapshot {snapshot}")))?;
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["fbs_id", "seq", "x", "y", "z"])
        .map_err(|e| io_err(path, e))?;
    for leg in &rec.legs {
        for (seq, p) in leg.route.waypoints.iter().enumerate() {
            w.write_record([
                leg.fbs.to_string(),
                seq.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
            ])
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(seed: u64, v: f64) -> MetricsReport {
        let mut summary = BTreeMap::new();
        summary.insert("fbs_count".to_string(), Stat { mean: v, std: 0.0 });
        MetricsReport {
            scenario: "s".into(),
            users: 80,
            config: "c".into(),
            seed,
            series: BTreeMap::new(),
            summary,
            aborted: None,
        }
    }

    #[test]
    fn population_std() {
        let s = aggregate(&[report(0, 4.0), report(1, 8.0)]).unwrap();
        assert_eq!(
            s.metrics["fbs_count"],
            Stat {
                mean: 6.0,
                std: 2.0
            }
        );
        let one = aggregate(&[report(0, 5.0)]).unwrap();
        assert_eq!(
            one.metrics["fbs_count"],
            Stat {
                mean: 5.0,
                std: 0.0
            }
        );
    }

    #[test]
    fn mixed_configs_rejected() {
        let mut b = report(1, 8.0);
        b.config = "other".into();
        assert!(aggregate(&[report(0, 4.0), b]).is_err());
        assert!(aggregate(&[]).is_err());
    }
}
