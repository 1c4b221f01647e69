//! Controller assessment: tracking error, stimulation power, and
//! suppression efficiency.
//!
//! All integrals use the trapezoidal rule over the samples that remain after
//! the burn-in is dropped. Currents enter in mA and are converted to A here;
//! power is reported in W and converted to µW only for the efficiency.

use serde::{Deserialize, Serialize};

use crate::control::SimulationTrace;
use crate::dsp::{TimeSeries, Unit};
use crate::error::{ensure_arg, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Electrode impedance, Ω.
    pub z_e: f64,
    /// Tracking target for the error signal, µV.
    pub b_target: f64,
    /// Run duration, s.
    pub t_sim: f64,
    /// Leading span dropped from every integral, s.
    pub burn_in: f64,
    /// Open-loop amplitude defining 100 % power, mA.
    pub reference_amplitude_ma: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            z_e: 500.0,
            b_target: 0.104,
            t_sim: 30.0,
            burn_in: 2.0,
            reference_amplitude_ma: 2.5,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::Config(format!("{path}.{field}: {msg}")));
        if !(self.z_e > 0.0 && self.z_e.is_finite()) {
            return fail("z_e", format!("must be > 0, got {}", self.z_e));
        }
        if !(self.b_target > 0.0 && self.b_target.is_finite()) {
            return fail("b_target", format!("must be > 0, got {}", self.b_target));
        }
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return fail("burn_in", format!("must be >= 0, got {}", self.burn_in));
        }
        if !(self.t_sim > self.burn_in && self.t_sim.is_finite()) {
            return fail(
                "t_sim",
                format!("must exceed burn_in ({}), got {}", self.burn_in, self.t_sim),
            );
        }
        if !(0.0..=crate::plant::MAX_DBS_MA).contains(&self.reference_amplitude_ma) {
            return fail(
                "reference_amplitude_ma",
                format!("must lie in [0, 3] mA, got {}", self.reference_amplitude_ma),
            );
        }
        Ok(())
    }
}

/// Which reading of the efficiency formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyVariant {
    /// Mean fractional suppression per µW.
    Standard,
    /// One minus the mean fractional suppression, per µW.
    AsPrinted,
}

/// Scores of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub controller: String,
    pub mse_raw: f64,
    pub mse_pct: f64,
    pub power_w: f64,
    pub power_pct: f64,
    /// %/µW; absent when no power was delivered.
    pub efficiency_std: Option<f64>,
    pub efficiency_as_printed: Option<f64>,
    pub mean_arv_uv: f64,
    pub t_sim: f64,
    pub burn_in_excluded: f64,
}

/// ∫ x dt over the samples, trapezoidal.
pub fn trapezoid(x: &[f64], dt: f64) -> f64 {
    match x {
        [] | [_] => 0.0,
        [first, .., last] => dt * (x.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

/// Time covered by the trapezoid over `s`, `(len − 1) / fs`.
pub fn integration_span(s: &TimeSeries) -> f64 {
    s.len().saturating_sub(1) as f64 / s.fs()
}

/// Normalized tracking error `(b − b_target) / b_target`.
pub fn error_signal(b_measured: &TimeSeries, b_target: f64) -> Result<TimeSeries> {
    ensure_arg!(
        b_target > 0.0 && b_target.is_finite(),
        "b_target must be > 0, got {b_target}"
    );
    let e = b_measured.samples().iter().map(|b| (b - b_target) / b_target).collect();
    Ok(b_measured.with_samples(e).with_unit(Unit::Dimensionless))
}

/// `(1 / t_sim) ∫ e² dt`.
pub fn mse(e: &TimeSeries, t_sim: f64) -> Result<f64> {
    ensure_arg!(!e.is_empty(), "error signal is empty");
    ensure_arg!(t_sim > 0.0 && t_sim.is_finite(), "t_sim must be > 0, got {t_sim}");
    let sq: Vec<f64> = e.samples().iter().map(|x| x * x).collect();
    Ok(trapezoid(&sq, e.dt()) / t_sim)
}

pub fn mse_percent(mse_controller: f64, mse_dbs_off: f64) -> Result<f64> {
    ensure_arg!(
        mse_dbs_off > 0.0 && mse_dbs_off.is_finite(),
        "DBS-off MSE must be > 0, got {mse_dbs_off}"
    );
    // Dividing first keeps the baseline against itself at exactly 100.
    Ok(mse_controller / mse_dbs_off * 100.0)
}

/// Mean electrical power `(1 / t_sim) ∫ z_e · i² dt`, W, from a current in mA.
pub fn power_consumption(i_dbs: &TimeSeries, z_e: f64, t_sim: f64) -> Result<f64> {
    ensure_arg!(z_e > 0.0 && z_e.is_finite(), "z_e must be > 0, got {z_e}");
    ensure_arg!(t_sim > 0.0 && t_sim.is_finite(), "t_sim must be > 0, got {t_sim}");
    ensure_arg!(
        i_dbs.unit() == Unit::Milliampere,
        "current must be in mA, got {:?}",
        i_dbs.unit()
    );
    let p: Vec<f64> = i_dbs
        .samples()
        .iter()
        .map(|ma| {
            let a = ma * 1e-3;
            z_e * a * a
        })
        .collect();
    Ok(trapezoid(&p, i_dbs.dt()) / t_sim)
}

/// Beta suppression relative to DBS-off per µW, in %/µW.
pub fn suppression_efficiency(
    b_off: &TimeSeries,
    b_ctrl: &TimeSeries,
    power_uw: f64,
    variant: EfficiencyVariant,
) -> Result<f64> {
    ensure_arg!(
        b_off.len() == b_ctrl.len() && crate::dsp::same_rate(b_off.fs(), b_ctrl.fs()),
        "ARV traces are not aligned ({} vs {} samples)",
        b_off.len(),
        b_ctrl.len()
    );
    ensure_arg!(b_off.len() >= 2, "ARV traces need at least two samples");
    ensure_arg!(
        power_uw > 0.0 && power_uw.is_finite(),
        "power must be > 0, got {power_uw}"
    );
    if let Some(i) = b_off.samples().iter().position(|&b| b <= 0.0) {
        return Err(Error::Argument(format!("DBS-off ARV is not positive at sample {i}")));
    }
    let frac: Vec<f64> = b_off
        .samples()
        .iter()
        .zip(b_ctrl.samples())
        .map(|(off, ctrl)| (off - ctrl) / off)
        .collect();
    let mean = trapezoid(&frac, b_off.dt()) / integration_span(b_off);
    Ok(match variant {
        EfficiencyVariant::Standard => 100.0 * mean / power_uw,
        EfficiencyVariant::AsPrinted => 100.0 * (1.0 - mean) / power_uw,
    })
}

/// Scores `trace` against the DBS-off run of the same plant.
///
/// `reference_power_w` is the mean power of open-loop stimulation at the
/// reference amplitude. Both traces lose `config.burn_in` seconds first, and
/// every time average is taken over the span that remains.
pub fn evaluate(
    trace: &SimulationTrace,
    dbs_off: &SimulationTrace,
    reference_power_w: f64,
    config: &MetricsConfig,
) -> Result<MetricsReport> {
    config.validate("metrics")?;
    ensure_arg!(
        reference_power_w > 0.0,
        "reference power must be > 0, got {reference_power_w}"
    );
    let arv = trace.beta_arv.skip_seconds(config.burn_in);
    let arv_off = dbs_off.beta_arv.skip_seconds(config.burn_in);
    let span = integration_span(&arv);
    ensure_arg!(span > 0.0, "no samples remain after the {} s burn-in", config.burn_in);

    let mse_raw = mse(&error_signal(&arv, config.b_target)?, span)?;
    let mse_off = mse(&error_signal(&arv_off, config.b_target)?, integration_span(&arv_off))?;
    let current = trace.dbs_current.skip_seconds(config.burn_in);
    let power_w = power_consumption(&current, config.z_e, span)?;
    let power_uw = power_w * 1e6;
    let efficiency = |v| -> Result<Option<f64>> {
        if power_uw > 0.0 {
            suppression_efficiency(&arv_off, &arv, power_uw, v).map(Some)
        } else {
            Ok(None)
        }
    };
    Ok(MetricsReport {
        controller: trace.meta.controller.clone(),
        mse_raw,
        mse_pct: mse_percent(mse_raw, mse_off)?,
        power_w,
        power_pct: 100.0 * power_w / reference_power_w,
        efficiency_std: efficiency(EfficiencyVariant::Standard)?,
        efficiency_as_printed: efficiency(EfficiencyVariant::AsPrinted)?,
        mean_arv_uv: arv.mean(),
        t_sim: config.t_sim,
        burn_in_excluded: config.burn_in,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn constant(x: f64, n: usize, unit: Unit) -> TimeSeries {
        TimeSeries::from_samples(vec![x; n], 1000.0, unit).unwrap()
    }

    #[test]
    fn error_signal_hand_cases() {
        for (b, want) in [(0.104, 0.0), (0.208, 1.0), (0.0, -1.0)] {
            let e = error_signal(&constant(b, 10, Unit::Microvolt), 0.104).unwrap();
            assert!(e.samples().iter().all(|&x| x == want), "b = {b}");
            assert_eq!(e.unit(), Unit::Dimensionless);
        }
        assert!(error_signal(&constant(1.0, 3, Unit::Microvolt), 0.0).is_err());
    }

    #[test]
    fn mse_closed_forms() {
        let n = 1001;
        let t_sim = (n - 1) as f64 / 1000.0;
        assert_eq!(mse(&constant(0.0, n, Unit::Dimensionless), t_sim).unwrap(), 0.0);
        assert_eq!(mse(&constant(1.0, n, Unit::Dimensionless), t_sim).unwrap(), 1.0);
        let square: Vec<f64> = (0..n).map(|i| if (i / 50) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let sq = TimeSeries::from_samples(square, 1000.0, Unit::Dimensionless).unwrap();
        assert_eq!(mse(&sq, t_sim).unwrap(), 1.0);
        let empty = TimeSeries::from_samples(vec![], 1000.0, Unit::Dimensionless).unwrap();
        assert!(mse(&empty, 1.0).is_err());
    }

    #[test]
    fn mse_percent_cases() {
        assert_eq!(mse_percent(0.3, 0.3).unwrap(), 100.0);
        assert_eq!(mse_percent(0.0, 0.3).unwrap(), 0.0);
        assert!(mse_percent(0.1, 0.0).is_err());
    }

    #[test]
    fn power_closed_forms() {
        let n = 30_001;
        let t_sim = (n - 1) as f64 / 1000.0;
        let p = power_consumption(&constant(2.5, n, Unit::Milliampere), 500.0, t_sim).unwrap();
        assert_relative_eq!(p, 3.125e-3, max_relative = 1e-9);
        assert_eq!(
            power_consumption(&constant(0.0, n, Unit::Milliampere), 500.0, t_sim).unwrap(),
            0.0
        );
        let half = power_consumption(&constant(1.25, n, Unit::Milliampere), 500.0, t_sim).unwrap();
        assert_relative_eq!(half, p / 4.0, max_relative = 1e-12);
        assert!(power_consumption(&constant(1.0, n, Unit::Microvolt), 500.0, t_sim).is_err());
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let x: Vec<f64> = (0..=100).map(|i| 3.0 + 2.0 * i as f64 * 0.01).collect();
        // ∫_0^1 (3 + 2t) dt = 4
        assert_relative_eq!(trapezoid(&x, 0.01), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn efficiency_hand_cases() {
        let off = constant(0.2, 101, Unit::Microvolt);
        let same = suppression_efficiency(&off, &off, 10.0, EfficiencyVariant::Standard).unwrap();
        assert_eq!(same, 0.0);
        let half = constant(0.1, 101, Unit::Microvolt);
        let e = suppression_efficiency(&off, &half, 10.0, EfficiencyVariant::Standard).unwrap();
        assert_relative_eq!(e, 5.0, max_relative = 1e-12);
        let printed = suppression_efficiency(&off, &half, 10.0, EfficiencyVariant::AsPrinted).unwrap();
        assert_relative_eq!(printed, 5.0, max_relative = 1e-12);
        let none = suppression_efficiency(&off, &off, 10.0, EfficiencyVariant::AsPrinted).unwrap();
        assert_relative_eq!(none, 10.0, max_relative = 1e-12);

        assert!(suppression_efficiency(&off, &half, 0.0, EfficiencyVariant::Standard).is_err());
        let short = constant(0.1, 50, Unit::Microvolt);
        assert!(suppression_efficiency(&off, &short, 1.0, EfficiencyVariant::Standard).is_err());
    }
}
