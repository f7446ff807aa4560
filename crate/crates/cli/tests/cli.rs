use std::path::Path;
use std::process::Command;

use fbsim::{parse_config_str, EXIT_ABORTED, EXIT_CONFIG, EXIT_OK};

const SMALL: &str = r#"
seeds = [1, 2, 3]
snapshots = 2

[region]
width = 1500.0
height = 1500.0

[users]
count = 15

[obstacles]
count = 4

[placement]
candidate_spacing = 300.0
node_limit = 0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbsim"))
}

fn write_config(dir: &Path, text: &str, out: &Path) -> std::path::PathBuf {
    let path = dir.join("cfg.toml");
    std::fs::write(
        &path,
        format!("out = {:?}\n{text}", out.display().to_string()),
    )
    .unwrap();
    path
}

#[test]
fn empty_file_gives_defaults() {
    let c = parse_config_str("", Path::new("x.toml"), &[]).unwrap();
    assert_eq!(c.seeds, vec![1]);
    assert_eq!(c.sim, fbs_core::simulation::SimConfig::default());
    assert_eq!(c.label, "users=80");
}

#[test]
fn unknown_keys_and_empty_seeds_are_errors() {
    let e = parse_config_str("[fleet]\nvelocty = 3.0\n", Path::new("x.toml"), &[]).unwrap_err();
    assert!(format!("{e:#}").contains("velocty"), "{e:#}");
    assert!(parse_config_str("seedz = [1]\n", Path::new("x.toml"), &[]).is_err());
    let e = parse_config_str("seeds = []\n", Path::new("x.toml"), &[]).unwrap_err();
    assert!(format!("{e:#}").contains("seed"));
    assert!(parse_config_str("[fleet]\nv_fbs = -1.0\n", Path::new("x.toml"), &[]).is_err());
}

#[test]
fn overrides_apply() {
    let o: Vec<String> = [
        "spacing=250",
        "psi=4",
        "mass=2.5",
        "recharge_rate=100",
        "safety_radius=8",
        "velocity=20",
        "users=33",
        "dt=12.5",
        "fleet.size=9",
        "label=custom",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let c = parse_config_str("", Path::new("x.toml"), &o).unwrap();
    assert_eq!(c.sim.placement.candidate_spacing, 250.0);
    assert_eq!(c.sim.placement.psi, 4);
    assert_eq!(c.sim.energy.mass, 2.5);
    assert_eq!(c.sim.fleet.recharge_rate, Some(100.0));
    assert_eq!(c.sim.fleet.safety_radius, 8.0);
    assert_eq!(c.sim.fleet.v_fbs, 20.0);
    assert_eq!(c.sim.users.count, 33);
    assert_eq!(c.sim.dt, Some(12.5));
    assert_eq!(c.sim.fleet.size, Some(9));
    assert_eq!(c.label, "custom");
    assert!(parse_config_str("", Path::new("x.toml"), &["novalue".into()]).is_err());
    assert!(parse_config_str("", Path::new("x.toml"), &["fleet.nope=1".into()]).is_err());
}

fn strip_timing(v: &mut serde_json::Value) {
    if let Some(series) = v.get_mut("series").and_then(|s| s.as_object_mut()) {
        for k in ["solve_time", "graph_time", "placement_time"] {
            series.remove(k);
        }
    }
    if let Some(summary) = v.get_mut("summary").and_then(|s| s.as_object_mut()) {
        for k in ["solve_time", "graph_time", "placement_time"] {
            summary.remove(k);
        }
    }
}

fn episode(out: &Path, seed: u64) -> serde_json::Value {
    let text = std::fs::read_to_string(out.join(format!("episodes/seed_{seed}.json"))).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    strip_timing(&mut v);
    v
}

#[test]
fn three_seeds_write_episodes_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), SMALL, &out);
    let st = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(
        st.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    for s in 1..=3 {
        assert!(out.join(format!("episodes/seed_{s}.json")).is_file());
        assert!(out
            .join(format!("episodes/seed_{s}/waypoints/snapshot_001.csv"))
            .is_file());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["replications"], 3);
    let rows = fbs_core::metrics::read_figure_csv(&out.join("fbs_count.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(!out.join("aborted.txt").exists());

    // Same config again: every non-timing output is identical.
    let again = dir.path().join("again");
    let st = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    for s in 1..=3 {
        assert_eq!(episode(&out, s), episode(&again, s));
        let wp = format!("episodes/seed_{s}/waypoints/snapshot_002.csv");
        assert_eq!(
            std::fs::read(out.join(&wp)).unwrap(),
            std::fs::read(again.join(&wp)).unwrap()
        );
    }
    for m in [
        "fbs_count",
        "dist_per_user",
        "energy_per_fbs",
        "rate_per_fbs",
    ] {
        let f = format!("{m}.csv");
        assert_eq!(
            std::fs::read(out.join(&f)).unwrap(),
            std::fs::read(again.join(&f)).unwrap()
        );
    }
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), SMALL, &out);
    let st = bin()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--seeds",
            "5",
            "--snapshots",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(
        st.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert!(out.join("episodes/seed_5.json").is_file());
    assert!(!out.join("episodes/seed_1.json").exists());
    let ep = episode(&out, 5);
    assert_eq!(ep["series"]["fbs_count"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "[fleet]\nvelocty = 3.0\n", &out);
    let st = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&st.stderr).contains("velocty"));
    let st = bin()
        .args(["validate", "/nonexistent/cfg.toml"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_CONFIG));
    let good = write_config(dir.path(), SMALL, &out);
    let st = bin().arg("validate").arg(&good).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&st.stdout).contains("3 seeds"));
}

#[test]
fn impossible_coverage_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let text = r#"
seeds = [1]
snapshots = 2
[region]
width = 4000.0
height = 4000.0
[users]
count = 15
[obstacles]
count = 4
[placement]
candidate_spacing = 1400.0
node_limit = 0
"#;
    let cfg = write_config(dir.path(), text, &out);
    let st = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(
        st.status.code(),
        Some(EXIT_ABORTED),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let flag = std::fs::read_to_string(out.join("aborted.txt")).unwrap();
    assert!(flag.starts_with("seed 1:"), "{flag}");
}
