//! Batch front end for the closed-loop DBS suite.
//!
//! [`execute`] is the whole program: it parses arguments, runs one subcommand
//! and maps the outcome to an exit code. Diagnostics go to stderr; stdout only
//! ever carries one JSON summary document.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cldbs_core::config::ExperimentConfig;
use cldbs_core::control::LifControllerParams;
use cldbs_core::dataset::{self, DatasetSpec};
use cldbs_core::experiment::{self, ComparisonRow};
use cldbs_core::{Error, Result};

pub mod plot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Seeds used by `compare` when none are given: five consecutive seeds
/// starting at the configured plant seed.
pub const DEFAULT_COMPARE_SEEDS: u64 = 5;

#[derive(Debug, Parser)]
#[command(name = "cldbs", version, about = "Closed-loop DBS simulations with LIF controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One closed-loop run: trace CSV and metrics JSON.
    Simulate {
        /// Experiment config (JSON). Built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// DBS-off, open-loop, on-off LIF and dual LIF on identical plant seeds.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Plant seeds, e.g. `--seeds 1 2 3` or `--seeds 1,2,3`.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Repeats `simulate` over values of one dotted config parameter.
    Sweep {
        /// Dotted path, e.g. `controller.lif.gain`.
        #[arg(long)]
        param: String,
        /// JSON values; bare words are taken as strings.
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        values: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Labeled run files plus a digest manifest.
    GenDataset {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG figures from a run CSV or a comparison CSV.
    Plot {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            // A closed stdout (e.g. piped into `head`) is not a failure of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn run(command: Command) -> Result<Value> {
    match command {
        Command::Simulate { config, out } => simulate(&load_config(config.as_deref())?, &out),
        Command::Compare { config, out, seeds } => {
            let cfg = load_config(config.as_deref())?;
            let seeds = seeds.unwrap_or_else(|| (0..DEFAULT_COMPARE_SEEDS).map(|k| cfg.plant.seed + k).collect());
            compare(&cfg, &seeds, &out)
        }
        Command::Sweep {
            param,
            values,
            config,
            out,
        } => sweep(&load_config(config.as_deref())?, &param, &values, &out),
        Command::GenDataset { spec, out } => gen_dataset(&DatasetSpec::from_file(&spec)?, &out),
        Command::Plot { run, out } => plot_file(&run, &out),
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    for (field, name) in [
        ("output.trace_file", &cfg.output.trace_file),
        ("output.metrics_file", &cfg.output.metrics_file),
        ("output.comparison_file", &cfg.output.comparison_file),
    ] {
        plain_file_name(field, name)?;
    }
    Ok(cfg)
}

/// Output names must stay inside `--out`.
fn plain_file_name(field: &str, name: &str) -> Result<()> {
    let p = Path::new(name);
    let plain = p.components().count() == 1 && p.file_name().is_some_and(|f| f == p.as_os_str());
    if plain {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{field}: must be a bare file name, got `{name}`"
        )))
    }
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// ARV reference lines drawn on every trace plot.
fn default_targets() -> Vec<plot::Reference> {
    let p = LifControllerParams::default();
    let mut refs = vec![plot::Reference {
        label: "target".into(),
        value: p.b_target,
    }];
    if p.t_low != p.b_target {
        refs.push(plot::Reference {
            label: "lower target".into(),
            value: p.t_low,
        });
    }
    refs
}

fn targets_for(cfg: &ExperimentConfig) -> Vec<plot::Reference> {
    let p = &cfg.controller.lif;
    let mut refs = vec![plot::Reference {
        label: "target".into(),
        value: p.t_up,
    }];
    if p.t_low != p.t_up {
        refs.push(plot::Reference {
            label: "lower target".into(),
            value: p.t_low,
        });
    }
    if p.b_target != p.t_up {
        refs.push(plot::Reference {
            label: "on-off target".into(),
            value: p.b_target,
        });
    }
    refs
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Value> {
    let run = experiment::simulate(cfg)?;
    create_out(out)?;
    let trace_path = out.join(&cfg.output.trace_file);
    let digest = dataset::write_run(&run.trace, &trace_path)?;
    let metrics_path = out.join(&cfg.output.metrics_file);
    write_json(&metrics_path, &run.report)?;
    let plots = if cfg.output.plots {
        plot::render_trace_plots(&run.trace, &targets_for(cfg), out)?
    } else {
        Vec::new()
    };
    Ok(json!({
        "command": "simulate",
        "trace": trace_path,
        "trace_sha256": digest,
        "metrics_file": metrics_path,
        "plots": plots,
        "metrics": run.report,
    }))
}

fn compare(cfg: &ExperimentConfig, seeds: &[u64], out: &Path) -> Result<Value> {
    let table = experiment::compare(cfg, seeds)?;
    create_out(out)?;
    let summary_path = out.join(&cfg.output.comparison_file);
    experiment::write_comparison_csv(&table.summary, &summary_path)?;
    let stem = summary_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("comparison")
        .to_string();
    let per_seed_path = out.join(format!("{stem}_per_seed.csv"));
    experiment::write_comparison_csv(&table.per_seed, &per_seed_path)?;
    let json_path = out.join(format!("{stem}.json"));
    write_json(&json_path, &table)?;
    let plots = if cfg.output.plots {
        plot::render_comparison_plots(&table.summary, out)?
    } else {
        Vec::new()
    };
    Ok(json!({
        "command": "compare",
        "seeds": seeds,
        "comparison": summary_path,
        "per_seed": per_seed_path,
        "plots": plots,
        "summary": table.summary,
    }))
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

#[derive(serde::Serialize)]
struct SweepRow<'a> {
    param: &'a str,
    value: String,
    mse_pct: f64,
    power_pct: f64,
    efficiency_std: Option<f64>,
    efficiency_as_printed: Option<f64>,
    power_w: f64,
    mean_arv_uv: f64,
}

fn sweep(cfg: &ExperimentConfig, param: &str, raw: &[String], out: &Path) -> Result<Value> {
    let values: Vec<Value> = raw.iter().map(|r| parse_value(r)).collect();
    let points = experiment::sweep(cfg, param, &values)?;
    create_out(out)?;
    let json_path = out.join("sweep.json");
    write_json(&json_path, &points)?;
    let csv_path = out.join("sweep.csv");
    let mut w =
        csv::Writer::from_path(&csv_path).map_err(|e| Error::Argument(format!("{}: {e}", csv_path.display())))?;
    for p in &points {
        let r = &p.report;
        w.serialize(SweepRow {
            param,
            value: match &p.value {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            },
            mse_pct: r.mse_pct,
            power_pct: r.power_pct,
            efficiency_std: r.efficiency_std,
            efficiency_as_printed: r.efficiency_as_printed,
            power_w: r.power_w,
            mean_arv_uv: r.mean_arv_uv,
        })
        .map_err(|e| Error::Argument(format!("{}: {e}", csv_path.display())))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: csv_path.clone(),
        source: e,
    })?;
    Ok(json!({
        "command": "sweep",
        "param": param,
        "sweep": csv_path,
        "points": points,
    }))
}

fn gen_dataset(spec: &DatasetSpec, out: &Path) -> Result<Value> {
    create_out(out)?;
    let manifest = dataset::generate_dataset(spec, out)?;
    Ok(json!({
        "command": "gen-dataset",
        "manifest": out.join(dataset::MANIFEST_FILE),
        "runs": manifest.runs.len(),
        "config_digest": manifest.config_digest,
    }))
}

/// What a CSV given to `plot` holds, decided from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotInput {
    Run,
    Comparison,
}

pub fn detect_plot_input(path: &Path) -> Result<PlotInput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let header = text.lines().next().unwrap_or("").trim();
    if header == dataset::COLUMNS.join(",") {
        Ok(PlotInput::Run)
    } else if header.split(',').any(|c| c == "controller") {
        Ok(PlotInput::Comparison)
    } else {
        Err(Error::Format {
            path: path.to_path_buf(),
            row: 1,
            message: "header matches neither a run file nor a comparison table".into(),
        })
    }
}

fn plot_file(input: &Path, out: &Path) -> Result<Value> {
    let kind = detect_plot_input(input)?;
    create_out(out)?;
    let files = match kind {
        PlotInput::Run => plot::render_trace_plots(&dataset::read_run(input)?, &default_targets(), out)?,
        PlotInput::Comparison => {
            let rows: Vec<ComparisonRow> = experiment::read_comparison_csv(input)?;
            plot::render_comparison_plots(&rows, out)?
        }
    };
    Ok(json!({
        "command": "plot",
        "input": match kind { PlotInput::Run => "run", PlotInput::Comparison => "comparison" },
        "files": files,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_words_become_strings() {
        assert_eq!(parse_value("0.5"), json!(0.5));
        assert_eq!(parse_value("severe"), json!("severe"));
        assert_eq!(parse_value("\"mild\""), json!("mild"));
    }

    #[test]
    fn output_names_cannot_escape() {
        assert!(plain_file_name("f", "trace.csv").is_ok());
        for bad in ["../trace.csv", "sub/trace.csv", "/tmp/x.csv", ".", ""] {
            assert!(plain_file_name("f", bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(execute(["cldbs", "--help"]), EXIT_OK);
        assert_eq!(execute(["cldbs", "--version"]), EXIT_OK);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(execute(["cldbs", "frobnicate"]), EXIT_USAGE);
        assert_eq!(execute(["cldbs", "simulate", "--bogus"]), EXIT_USAGE);
        assert_eq!(execute(["cldbs", "simulate"]), EXIT_USAGE);
    }
}
