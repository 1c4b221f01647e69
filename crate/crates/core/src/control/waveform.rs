use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square DBS pulse train; the controller sets its amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbsWaveformSpec {
    pub frequency_hz: f64,
    pub pulse_width_s: f64,
}

impl Default for DbsWaveformSpec {
    fn default() -> Self {
        Self {
            frequency_hz: 130.0,
            pulse_width_s: 60e-6,
        }
    }
}

impl DbsWaveformSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.pulse_width_s > 0.0 && self.duty() < 1.0) {
            return Err(Error::Config(format!(
                "{path}: need frequency > 0, width > 0, and frequency·width < 1"
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency_hz
    }

    pub fn duty(&self) -> f64 {
        self.frequency_hz * self.pulse_width_s
    }

    /// Time the pulse is on during `[0, t)`, for `t >= 0`.
    fn on_time_until(&self, t: f64) -> f64 {
        let period = self.period();
        let cycles = (t / period).floor();
        cycles * self.pulse_width_s + (t - cycles * period).clamp(0.0, self.pulse_width_s)
    }

    /// Fraction of `[t0, t1)` during which the pulse is on.
    pub fn on_fraction(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        ((self.on_time_until(t1) - self.on_time_until(t0)) / (t1 - t0)).clamp(0.0, 1.0)
    }
}

/// Instantaneous current at time `t`: `amplitude` inside each pulse window
/// `[k/f, k/f + width)`, zero elsewhere.
pub fn dbs_pulse_train(spec: &DbsWaveformSpec, amplitude: f64, t: f64) -> f64 {
    if t.rem_euclid(spec.period()) < spec.pulse_width_s {
        amplitude
    } else {
        0.0
    }
}
