//! Run files, dataset generation, and manifest integrity.
//!
//! A run file is a CSV with the header
//! `time_s,lfp_raw_uv,lfp_beta_uv,beta_arv_uv,dbs_amplitude_ma,dbs_current_ma`
//! and one row per sample. Numbers are written in shortest round-trip form,
//! so reading a file back restores every value exactly.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::control::{ControllerKind, RunMeta, SimulationTrace};
use crate::dsp::{TimeSeries, Unit};
use crate::error::{Error, Result};
use crate::experiment::{dbs_off_baseline, run_scenario};
use crate::plant::{PlantConfig, PlantMode, Severity};

pub const COLUMNS: [&str; 6] = [
    "time_s",
    "lfp_raw_uv",
    "lfp_beta_uv",
    "beta_arv_uv",
    "dbs_amplitude_ma",
    "dbs_current_ma",
];

/// Allowed deviation of a time step from the nominal spacing, s.
pub const TIME_TOLERANCE_S: f64 = 1e-9;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: &str = "1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Serializes `trace` to run-file bytes.
pub fn encode_run(trace: &SimulationTrace) -> Result<Vec<u8>> {
    trace.check_aligned()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Argument(format!("cannot encode run: {e}"));
    w.write_record(COLUMNS).map_err(io)?;
    let cols = trace.series();
    let mut row: Vec<String> = Vec::with_capacity(COLUMNS.len());
    for i in 0..trace.len() {
        row.clear();
        row.push(trace.raw_lfp.time_at(i).to_string());
        row.extend(cols.iter().map(|s| s.samples()[i].to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Argument(format!("cannot encode run: {e}")))
}

/// Writes `trace` to `path`; returns the SHA-256 of the file bytes.
pub fn write_run(trace: &SimulationTrace, path: &Path) -> Result<String> {
    let bytes = encode_run(trace)?;
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

fn format_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

/// Reads a run file. Rows are numbered from 1 at the header line.
pub fn read_run(path: &Path) -> Result<SimulationTrace> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| format_err(path, 1, e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if let Some(missing) = COLUMNS.iter().find(|c| !names.contains(c)) {
        return Err(format_err(path, 1, format!("missing column `{missing}`")));
    }
    if let Some(extra) = names.iter().find(|c| !COLUMNS.contains(c)) {
        return Err(format_err(path, 1, format!("unexpected column `{extra}`")));
    }
    if names != COLUMNS {
        return Err(format_err(
            path,
            1,
            format!("columns must be in the order {}", COLUMNS.join(",")),
        ));
    }

    let mut cols: [Vec<f64>; 6] = Default::default();
    for (k, rec) in r.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| format_err(path, row, e.to_string()))?;
        if rec.len() != COLUMNS.len() {
            return Err(format_err(
                path,
                row,
                format!("expected {} fields, found {}", COLUMNS.len(), rec.len()),
            ));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format_err(path, row, format!("`{}` is not a number: {field:?}", COLUMNS[c])))?;
            if !v.is_finite() {
                return Err(format_err(path, row, format!("`{}` is not finite", COLUMNS[c])));
            }
            cols[c].push(v);
        }
    }

    let t = &cols[0];
    if t.len() < 2 {
        return Err(format_err(
            path,
            t.len() + 1,
            "need at least two rows to infer the sampling rate",
        ));
    }
    let step = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
        return Err(format_err(path, i + 3, "time_s is not increasing"));
    }
    for (i, w) in t.windows(2).enumerate() {
        let d = w[1] - w[0];
        let row = i + 3;
        if (d - step).abs() > TIME_TOLERANCE_S {
            return Err(format_err(
                path,
                row,
                format!("time step {d} deviates from the spacing {step}"),
            ));
        }
    }
    // The text column loses the last bits of the step; a whole-Hz rate that
    // explains it is taken as the true one so that rewriting is byte-stable.
    let fs = match (1.0 / step, (1.0 / step).round()) {
        (raw, whole) if whole > 0.0 && (raw - whole).abs() <= 1e-6 * whole => whole,
        (raw, _) => raw,
    };
    let t0 = t[0];
    let [_, raw, beta, arv, amp, cur] = cols;
    let series = |x: Vec<f64>, unit| TimeSeries::new(x, fs, t0, unit);
    SimulationTrace::new(
        series(raw, Unit::Microvolt)?,
        series(beta, Unit::Microvolt)?,
        series(arv, Unit::Microvolt)?,
        series(amp, Unit::Milliampere)?,
        series(cur, Unit::Milliampere)?,
        RunMeta::default(),
    )
}

/// Which runs a dataset contains: every severity × scenario × seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub severities: Vec<Severity>,
    pub scenarios: Vec<ControllerKind>,
    pub seeds: Vec<u64>,
    /// Settings shared by every run; severity and seed are overridden.
    pub base: ExperimentConfig,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            severities: Severity::ALL.to_vec(),
            scenarios: vec![ControllerKind::DbsOff, ControllerKind::OpenLoop],
            seeds: vec![1, 2, 3],
            base: ExperimentConfig::default(),
        }
    }
}

impl DatasetSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        spec.base.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn run_count(&self) -> usize {
        self.severities.len() * self.scenarios.len() * self.seeds.len()
    }
}

pub fn run_id(severity: Severity, scenario: ControllerKind, seed: u64) -> String {
    format!("{}_{}_s{seed}", severity.label(), scenario.id())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub run_id: String,
    pub severity: Severity,
    pub controller: String,
    pub seed: u64,
    pub plant_mode: PlantMode,
    pub fs: f64,
    pub duration_s: f64,
    /// Relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    /// RFC 3339, UTC.
    pub generated_at: String,
    pub config_digest: String,
    pub runs: Vec<ManifestEntry>,
}

/// Generates every run of `spec` into `out_dir` and writes the manifest last.
pub fn generate_dataset(spec: &DatasetSpec, out_dir: &Path) -> Result<DatasetManifest> {
    if spec.run_count() == 0 {
        return Err(Error::Generation(
            "spec is empty: need at least one severity, scenario, and seed".into(),
        ));
    }
    spec.base.validate()?;
    let mut seen = HashSet::new();
    for &sev in &spec.severities {
        for &sc in &spec.scenarios {
            for &seed in &spec.seeds {
                let id = run_id(sev, sc, seed);
                if !seen.insert(id.clone()) {
                    return Err(Error::Generation(format!("duplicate run id `{id}`")));
                }
            }
        }
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let groups: Vec<(Severity, u64)> = spec
        .severities
        .iter()
        .flat_map(|&sev| spec.seeds.iter().map(move |&seed| (sev, seed)))
        .collect();
    let entries: Vec<Vec<ManifestEntry>> = groups
        .par_iter()
        .map(|&(sev, seed)| generate_group(spec, sev, seed, out_dir))
        .collect::<Result<_>>()?;

    // Manifest order follows the spec: severity, then scenario, then seed.
    let mut runs: Vec<ManifestEntry> = entries.into_iter().flatten().collect();
    let rank = |e: &ManifestEntry| {
        let sev = spec.severities.iter().position(|&s| s == e.severity);
        let sc = spec.scenarios.iter().position(|s| s.id() == e.controller);
        let seed = spec.seeds.iter().position(|&s| s == e.seed);
        (sev, sc, seed)
    };
    runs.sort_by_key(rank);

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION.into(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config_digest: spec.base.digest(),
        runs,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let tmp = out_dir.join(format!(".{MANIFEST_FILE}.tmp"));
    fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn generate_group(spec: &DatasetSpec, severity: Severity, seed: u64, out_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let cfg = &spec.base;
    let plant = PlantConfig {
        seed,
        severity,
        ..cfg.plant.clone()
    };
    let (off, center) = dbs_off_baseline(cfg, &plant)?;
    spec.scenarios
        .iter()
        .map(|&kind| {
            let trace = match kind {
                ControllerKind::DbsOff => off.clone(),
                _ => run_scenario(cfg, &plant, kind, center)?,
            };
            let id = run_id(severity, kind, seed);
            let file = format!("{id}.csv");
            let sha256 = write_run(&trace, &out_dir.join(&file))?;
            Ok(ManifestEntry {
                run_id: id,
                severity,
                controller: kind.id().into(),
                seed,
                plant_mode: plant.mode,
                fs: trace.fs(),
                duration_s: trace.raw_lfp.duration(),
                file,
                sha256,
            })
        })
        .collect()
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Checks that run ids are unique and every listed file exists with its
/// recorded digest. Returns the manifest and the resolved run-file paths.
pub fn validate_manifest(dir: &Path) -> Result<(DatasetManifest, Vec<PathBuf>)> {
    let manifest = read_manifest(dir)?;
    let mut seen = HashSet::new();
    let mut paths = Vec::with_capacity(manifest.runs.len());
    for e in &manifest.runs {
        if !seen.insert(e.run_id.as_str()) {
            return Err(Error::Integrity(format!("duplicate run id `{}`", e.run_id)));
        }
        let path = dir.join(&e.file);
        if !path.is_file() {
            return Err(Error::Integrity(format!("{}: listed file is missing", path.display())));
        }
        let actual = sha256_file(&path)?;
        if actual != e.sha256 {
            return Err(Error::Integrity(format!(
                "{}: digest {actual} does not match manifest {}",
                path.display(),
                e.sha256
            )));
        }
        paths.push(path);
    }
    Ok((manifest, paths))
}
