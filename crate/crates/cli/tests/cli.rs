use std::path::Path;
use std::process::Command;

use cldbs_cli::{execute, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use cldbs_core::dataset::{self, sha256_file};
use cldbs_core::experiment::read_comparison_csv;

fn cldbs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cldbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_two() {
    let out = cldbs(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let code = execute(["cldbs", "compare", "--out", s(dir.path()), "--fast"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let out = cldbs(&["simulate", "--config", s(&missing), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(EXIT_RUNTIME));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_config_gives_path_qualified_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"metrics": {"z_e": -5}}"#);
    let out = cldbs(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(EXIT_RUNTIME));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("metrics.z_e"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn output_names_must_stay_under_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"output": {"trace_file": "../escape.csv"}}"#);
    let code = execute([
        "cldbs",
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(!dir.path().join("escape.csv").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"metrics": {"t_sim": 8}}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        assert_eq!(
            execute(["cldbs", "simulate", "--config", s(&cfg), "--out", s(o)]),
            EXIT_OK
        );
    }
    for f in ["trace.csv", "metrics.json"] {
        assert_eq!(
            sha256_file(&a.join(f)).unwrap(),
            sha256_file(&b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn simulate_stdout_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"metrics": {"t_sim": 6}}"#);
    let out = cldbs(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "simulate");
    assert_eq!(v["metrics"]["controller"], "on_off_lif");
    let trace = dataset::read_run(&dir.path().join("o/trace.csv")).unwrap();
    assert!((trace.raw_lfp.duration() - 6.0).abs() < 0.01);
}

#[test]
fn compare_on_defaults_writes_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, "{}");
    let out = dir.path().join("o");
    let code = execute([
        "cldbs",
        "compare",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--seeds",
        "1",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    let header = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let header = header.lines().next().unwrap();
    for col in ["mse_pct", "power_pct", "efficiency_std"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    let rows = read_comparison_csv(&out.join("comparison.csv")).unwrap();
    let ids: Vec<&str> = rows.iter().map(|r| r.controller.as_str()).collect();
    assert_eq!(ids, ["dbs_off", "open_loop", "on_off_lif", "dual_lif"]);
    assert_eq!(
        read_comparison_csv(&out.join("comparison_per_seed.csv")).unwrap().len(),
        8
    );
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"metrics": {"t_sim": 6}}"#);
    let out = dir.path().join("o");
    let code = execute([
        "cldbs",
        "sweep",
        "--param",
        "controller.lif.gain",
        "--values",
        "0.5",
        "1",
        "2",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_rejects_unknown_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = cldbs(&[
        "sweep",
        "--param",
        "controller.lif.nope",
        "--values",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_RUNTIME));
    assert!(String::from_utf8_lossy(&out.stderr).contains("controller.lif.nope"));
}

#[test]
fn gen_dataset_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write(
        &spec,
        r#"{"severities": ["healthy", "severe"], "scenarios": ["dbs_off"], "seeds": [4],
            "base": {"metrics": {"t_sim": 5}}}"#,
    );
    let out = dir.path().join("ds");
    assert_eq!(
        execute(["cldbs", "gen-dataset", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_OK
    );
    let (manifest, paths) = dataset::validate_manifest(&out).unwrap();
    assert_eq!(manifest.runs.len(), 2);
    assert_eq!(paths.len(), 2);
}

#[test]
fn plot_renders_trace_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    write(&cfg, r#"{"metrics": {"t_sim": 6}}"#);
    let sim = dir.path().join("sim");
    assert_eq!(
        execute(["cldbs", "simulate", "--config", s(&cfg), "--out", s(&sim)]),
        EXIT_OK
    );
    let figs = dir.path().join("figs");
    assert_eq!(
        execute(["cldbs", "plot", "--run", s(&sim.join("trace.csv")), "--out", s(&figs)]),
        EXIT_OK
    );
    for name in ["raw_lfp", "beta_lfp", "beta_arv", "amplitude", "dbs_current"] {
        assert!(figs.join(format!("{name}.svg")).exists(), "{name}");
        assert!(figs.join(format!("{name}.csv")).exists(), "{name}");
    }
    // The on-off law never decrements, so the plotted amplitude is a staircase.
    let amp = std::fs::read_to_string(figs.join("amplitude.csv")).unwrap();
    let a: Vec<f64> = amp
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(a.windows(2).all(|w| w[1] >= w[0]));
    assert!(a.iter().all(|&x| x <= 3.0));
    assert!(a.last().unwrap() > a.first().unwrap());
    let arv = std::fs::read_to_string(figs.join("beta_arv.svg")).unwrap();
    assert!(arv.contains(r#"data-value="0.104""#));
    assert!(arv.contains(r#"data-value="0.05207""#));

    let cmp = dir.path().join("cmp");
    assert_eq!(
        execute([
            "cldbs",
            "compare",
            "--config",
            s(&cfg),
            "--out",
            s(&cmp),
            "--seeds",
            "1"
        ]),
        EXIT_OK
    );
    let bars = dir.path().join("bars");
    assert_eq!(
        execute([
            "cldbs",
            "plot",
            "--run",
            s(&cmp.join("comparison.csv")),
            "--out",
            s(&bars)
        ]),
        EXIT_OK
    );
    for name in ["mse_pct", "power_pct", "efficiency_std"] {
        assert!(bars.join(format!("{name}.svg")).exists(), "{name}");
    }
}

#[test]
fn plot_rejects_empty_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("empty.csv");
    write(
        &table,
        "seed,controller,mse_pct,power_pct,efficiency_std,efficiency_as_printed,power_w,mse_raw,mean_arv_uv\n",
    );
    let code = execute(["cldbs", "plot", "--run", s(&table), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code, EXIT_RUNTIME);
}
