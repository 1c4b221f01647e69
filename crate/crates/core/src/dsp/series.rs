use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};

/// Physical unit attached to a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "uV")]
    Microvolt,
    #[serde(rename = "mA")]
    Milliampere,
    #[serde(rename = "1")]
    Dimensionless,
}

/// A uniformly sampled, real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    fs: f64,
    t0: f64,
    unit: Unit,
}

impl TimeSeries {
    /// Builds a series, rejecting non-positive sampling rates and non-finite samples.
    pub fn new(samples: Vec<f64>, fs: f64, t0: f64, unit: Unit) -> Result<Self> {
        ensure_arg!(fs.is_finite() && fs > 0.0, "sampling rate must be positive, got {fs}");
        ensure_arg!(t0.is_finite(), "start time must be finite");
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(crate::Error::Argument(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self { samples, fs, t0, unit })
    }

    /// Builds a series starting at t = 0.
    pub fn from_samples(samples: Vec<f64>, fs: f64, unit: Unit) -> Result<Self> {
        Self::new(samples, fs, 0.0, unit)
    }

    /// Same timing and unit, new samples. The caller guarantees finiteness.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self {
            samples,
            fs: self.fs,
            t0: self.t0,
            unit: self.unit,
        }
    }

    pub(crate) fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fs
    }

    /// Duration covered by the samples, `len / fs`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Time stamp of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.fs
    }

    /// The part of the series from `start` seconds after `t0` to the end.
    pub fn skip_seconds(&self, start: f64) -> TimeSeries {
        let first = ((start * self.fs).round().max(0.0) as usize).min(self.samples.len());
        TimeSeries {
            samples: self.samples[first..].to_vec(),
            fs: self.fs,
            t0: self.time_at(first),
            unit: self.unit,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}
