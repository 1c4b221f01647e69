//! JSON experiment configuration.
//!
//! Every field has a default, so `{}` is a complete config. Unknown keys are
//! rejected, and every error names the offending path.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::{ControllerKind, DbsWaveformSpec, LifControllerParams};
use crate::dsp::ChainConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricsConfig;
use crate::plant::{PlantConfig, MAX_DBS_MA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Policy used by single runs.
    pub kind: ControllerKind,
    pub lif: LifControllerParams,
    pub open_loop_amplitude_ma: f64,
    pub waveform: DbsWaveformSpec,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kind: ControllerKind::OnOffLif,
            lif: LifControllerParams::default(),
            open_loop_amplitude_ma: 2.5,
            waveform: DbsWaveformSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace_file: String,
    pub metrics_file: String,
    pub comparison_file: String,
    /// Also render SVG figures next to the data.
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace_file: "trace.csv".into(),
            metrics_file: "metrics.json".into(),
            comparison_file: "comparison.csv".into(),
            plots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub plant: PlantConfig,
    pub dsp: ChainConfig,
    pub controller: ControllerConfig,
    pub metrics: MetricsConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        validate_chain(&self.dsp, "dsp")?;
        self.controller.lif.validate("controller.lif")?;
        self.controller.waveform.validate("controller.waveform")?;
        let a = self.controller.open_loop_amplitude_ma;
        if !(0.0..=MAX_DBS_MA).contains(&a) {
            return Err(Error::Config(format!(
                "controller.open_loop_amplitude_ma: must lie in [0, 3] mA, got {a}"
            )));
        }
        self.metrics.validate("metrics")?;
        if self.metrics.t_sim < crate::control::MIN_RUN_DURATION_S {
            return Err(Error::Config(format!(
                "metrics.t_sim: runs must last at least {} s, got {}",
                crate::control::MIN_RUN_DURATION_S,
                self.metrics.t_sim
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, lowercase hex.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

fn validate_chain(c: &ChainConfig, path: &str) -> Result<()> {
    let fail = |field: &str, msg: String| Err(Error::Config(format!("{path}.{field}: {msg}")));
    if !(c.sample_rate_hz > 0.0 && c.sample_rate_hz.is_finite()) {
        return fail("sample_rate_hz", format!("must be > 0, got {}", c.sample_rate_hz));
    }
    if !(c.arv_window_s * c.sample_rate_hz >= 1.0) {
        return fail(
            "arv_window_s",
            format!("must cover at least one sample, got {}", c.arv_window_s),
        );
    }
    if c.order == 0 || !c.order.is_multiple_of(2) {
        return fail("order", format!("must be a positive even number, got {}", c.order));
    }
    if let Some(f) = c.f_center_hz {
        if let Err(e) = c.design(f).design() {
            return fail("f_center_hz", e.to_string());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = ExperimentConfig::from_json(r#"{"plant": {"surrogate": {"k2": 1}}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("plant.surrogate"), "{msg}");
        assert!(msg.contains("k2"), "{msg}");
    }

    #[test]
    fn out_of_range_values_name_their_path() {
        let cases = [
            (r#"{"plant": {"surrogate": {"i50": 4}}}"#, "plant.surrogate.i50"),
            (r#"{"controller": {"lif": {"tau_m": -1}}}"#, "controller.lif.tau_m"),
            (r#"{"metrics": {"z_e": 0}}"#, "metrics.z_e"),
            (r#"{"dsp": {"f_center_hz": 499}}"#, "dsp.f_center_hz"),
            (
                r#"{"controller": {"open_loop_amplitude_ma": 3.5}}"#,
                "controller.open_loop_amplitude_ma",
            ),
            (r#"{"plant": {"severity": "extreme"}}"#, "plant.severity"),
        ];
        for (doc, path) in cases {
            let msg = ExperimentConfig::from_json(doc).unwrap_err().to_string();
            assert!(msg.contains(path), "{doc}: {msg}");
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.plant.seed += 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
