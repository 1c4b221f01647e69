//! Experiment orchestration: filter centering, scenario runs, controller
//! comparison, and parameter sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::control::{run_closed_loop, Controller, ControllerKind, SimulationTrace};
use crate::dsp::{estimate_beta_peak, BetaChain, TimeSeries, Unit};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, integration_span, power_consumption, MetricsReport};
use crate::plant::{build_plant, PlantConfig};

/// Provisional band-pass center for the DBS-off run, before the peak is known.
const PROVISIONAL_CENTER_HZ: f64 = 20.0;

/// Controllers in the order the comparison reports them.
pub const COMPARISON: [ControllerKind; 4] = [
    ControllerKind::DbsOff,
    ControllerKind::OpenLoop,
    ControllerKind::OnOffLif,
    ControllerKind::DualLif,
];

/// One closed-loop run of `kind` on `plant` with the chain centered at `f_center`.
pub fn run_scenario(
    cfg: &ExperimentConfig,
    plant: &PlantConfig,
    kind: ControllerKind,
    f_center: f64,
) -> Result<SimulationTrace> {
    let mut p = build_plant(plant)?;
    let mut controller = Controller::new(kind, &cfg.controller.lif, cfg.controller.open_loop_amplitude_ma);
    let mut trace = run_closed_loop(
        &mut p,
        &mut controller,
        cfg.metrics.t_sim,
        &cfg.dsp,
        f_center,
        &cfg.controller.waveform,
    )?;
    trace.meta.seed = plant.seed;
    trace.meta.config_digest = cfg.digest();
    Ok(trace)
}

/// Re-runs the beta chain over the raw LFP of `trace` with a new center.
///
/// The chain is causal and starts from rest, so this reproduces exactly what
/// a streaming run centered at `f_center` would have recorded.
pub fn refilter(trace: &SimulationTrace, cfg: &ExperimentConfig, f_center: f64) -> Result<SimulationTrace> {
    let mut chain = BetaChain::new(&cfg.dsp, f_center)?;
    let (beta, arv): (Vec<f64>, Vec<f64>) = trace
        .raw_lfp
        .samples()
        .iter()
        .map(|&x| {
            let s = chain.push(x);
            (s.beta, s.arv)
        })
        .unzip();
    let fs = trace.fs();
    let mut out = trace.clone();
    out.beta_lfp = TimeSeries::new(beta, fs, trace.beta_lfp.t0(), Unit::Microvolt)?;
    out.beta_arv = TimeSeries::new(arv, fs, trace.beta_arv.t0(), Unit::Microvolt)?;
    out.meta.f_center_hz = f_center;
    Ok(out)
}

/// Runs the plant without stimulation and fixes the band-pass center.
///
/// A configured `dsp.f_center_hz` is used as is; otherwise the center is the
/// beta peak of this run's raw LFP (burn-in excluded). Returns the DBS-off
/// trace filtered at that center, and the center.
pub fn dbs_off_baseline(cfg: &ExperimentConfig, plant: &PlantConfig) -> Result<(SimulationTrace, f64)> {
    let provisional = cfg.dsp.f_center_hz.unwrap_or(PROVISIONAL_CENTER_HZ);
    let trace = run_scenario(cfg, plant, ControllerKind::DbsOff, provisional)?;
    let center = match cfg.dsp.f_center_hz {
        Some(f) => return Ok((trace, f)),
        None => estimate_beta_peak(&trace.raw_lfp.skip_seconds(cfg.metrics.burn_in))?,
    };
    Ok((refilter(&trace, cfg, center)?, center))
}

/// Mean power of open-loop stimulation at the reference amplitude over the
/// scored span, W.
pub fn reference_power(cfg: &ExperimentConfig) -> Result<f64> {
    let fs = cfg.dsp.sample_rate_hz;
    let n = (cfg.metrics.t_sim * fs).round() as usize;
    let wf = &cfg.controller.waveform;
    let a = cfg.metrics.reference_amplitude_ma;
    let current = (0..n)
        .map(|m| {
            let t = m as f64 / fs;
            a * wf.on_fraction(t, t + 1.0 / fs).sqrt()
        })
        .collect();
    let i = TimeSeries::from_samples(current, fs, Unit::Milliampere)?.skip_seconds(cfg.metrics.burn_in);
    power_consumption(&i, cfg.metrics.z_e, integration_span(&i))
}

/// One scored run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trace: SimulationTrace,
    pub report: MetricsReport,
}

/// Runs the configured controller and scores it against DBS-off.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let (off, center) = dbs_off_baseline(cfg, &cfg.plant)?;
    let p_ref = reference_power(cfg)?;
    let trace = match cfg.controller.kind {
        ControllerKind::DbsOff => off.clone(),
        kind => run_scenario(cfg, &cfg.plant, kind, center)?,
    };
    let report = evaluate(&trace, &off, p_ref, &cfg.metrics)?;
    Ok(ScenarioRun { trace, report })
}

/// Every comparison controller on one seed; rows in [`COMPARISON`] order.
pub fn compare_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<ScenarioRun>> {
    let plant = PlantConfig {
        seed,
        ..cfg.plant.clone()
    };
    let (off, center) = dbs_off_baseline(cfg, &plant)?;
    let p_ref = reference_power(cfg)?;
    COMPARISON
        .iter()
        .map(|&kind| {
            let trace = match kind {
                ControllerKind::DbsOff => off.clone(),
                _ => run_scenario(cfg, &plant, kind, center)?,
            };
            let report = evaluate(&trace, &off, p_ref, &cfg.metrics)?;
            Ok(ScenarioRun { trace, report })
        })
        .collect()
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// `None` in the across-seed summary.
    pub seed: Option<u64>,
    pub controller: String,
    pub mse_pct: f64,
    pub power_pct: f64,
    pub efficiency_std: Option<f64>,
    pub efficiency_as_printed: Option<f64>,
    pub power_w: f64,
    pub mse_raw: f64,
    pub mean_arv_uv: f64,
}

impl ComparisonRow {
    fn from_report(seed: u64, r: &MetricsReport) -> Self {
        Self {
            seed: Some(seed),
            controller: r.controller.clone(),
            mse_pct: r.mse_pct,
            power_pct: r.power_pct,
            efficiency_std: r.efficiency_std,
            efficiency_as_printed: r.efficiency_as_printed,
            power_w: r.power_w,
            mse_raw: r.mse_raw,
            mean_arv_uv: r.mean_arv_uv,
        }
    }
}

/// Per-seed rows and the across-seed means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub per_seed: Vec<ComparisonRow>,
    pub summary: Vec<ComparisonRow>,
}

/// Writes comparison rows as CSV with a header.
pub fn write_comparison_csv(rows: &[ComparisonRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Argument(format!("cannot encode comparison row: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Argument(format!("cannot encode comparison: {e}")))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_comparison_csv(path: &Path) -> Result<Vec<ComparisonRow>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    r.deserialize()
        .enumerate()
        .map(|(k, row)| {
            row.map_err(|e| Error::Format {
                path: path.to_path_buf(),
                row: k + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

impl Comparison {
    pub fn rows_for(&self, controller: ControllerKind) -> impl Iterator<Item = &ComparisonRow> {
        self.per_seed.iter().filter(move |r| r.controller == controller.id())
    }
}

fn mean_of(rows: &[&ComparisonRow], f: impl Fn(&ComparisonRow) -> f64) -> f64 {
    rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64
}

fn mean_opt(rows: &[&ComparisonRow], f: impl Fn(&ComparisonRow) -> Option<f64>) -> Option<f64> {
    rows.iter()
        .map(|r| f(r))
        .sum::<Option<f64>>()
        .map(|s| s / rows.len() as f64)
}

/// DBS-off, open-loop, on-off LIF, and dual LIF on identical plant seeds.
pub fn compare(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Comparison> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(Error::Argument("compare needs at least one seed".into()));
    }
    let runs: Vec<(u64, Vec<ScenarioRun>)> = seeds
        .par_iter()
        .map(|&s| compare_seed(cfg, s).map(|r| (s, r)))
        .collect::<Result<_>>()?;
    let per_seed: Vec<ComparisonRow> = runs
        .iter()
        .flat_map(|(s, rs)| rs.iter().map(move |r| ComparisonRow::from_report(*s, &r.report)))
        .collect();
    let summary = COMPARISON
        .iter()
        .map(|k| {
            let rows: Vec<&ComparisonRow> = per_seed.iter().filter(|r| r.controller == k.id()).collect();
            ComparisonRow {
                seed: None,
                controller: k.id().to_string(),
                mse_pct: mean_of(&rows, |r| r.mse_pct),
                power_pct: mean_of(&rows, |r| r.power_pct),
                efficiency_std: mean_opt(&rows, |r| r.efficiency_std),
                efficiency_as_printed: mean_opt(&rows, |r| r.efficiency_as_printed),
                power_w: mean_of(&rows, |r| r.power_w),
                mse_raw: mean_of(&rows, |r| r.mse_raw),
                mean_arv_uv: mean_of(&rows, |r| r.mean_arv_uv),
            }
        })
        .collect();
    Ok(Comparison { per_seed, summary })
}

/// Returns a copy of `cfg` with the dotted `param` (e.g. `controller.lif.gain`)
/// set to `value`, validated like a freshly parsed config.
pub fn with_param(cfg: &ExperimentConfig, param: &str, value: serde_json::Value) -> Result<ExperimentConfig> {
    let mut doc = serde_json::to_value(cfg)?;
    let mut node = &mut doc;
    let parts: Vec<&str> = param.split('.').collect();
    for (depth, key) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("{param}: `{}` is not a section", parts[..depth].join("."))))?;
        if !obj.contains_key(*key) {
            return Err(Error::Config(format!("{param}: unknown field `{key}`")));
        }
        node = obj.get_mut(*key).expect("checked above");
    }
    *node = value;
    ExperimentConfig::from_json(&doc.to_string())
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: String,
    pub value: serde_json::Value,
    pub report: MetricsReport,
}

/// Runs [`simulate`] once per value of `param`.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[serde_json::Value]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Argument("sweep needs at least one value".into()));
    }
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|v| with_param(cfg, param, v.clone()))
        .collect::<Result<_>>()?;
    configs
        .par_iter()
        .zip(values)
        .map(|(c, v)| {
            simulate(c).map(|r| SweepPoint {
                param: param.to_string(),
                value: v.clone(),
                report: r.report,
            })
        })
        .collect()
}
