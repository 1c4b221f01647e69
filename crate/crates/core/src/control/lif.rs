//! LIF-based stimulation controllers.
//!
//! The measured beta ARV plays the membrane potential and the target plays
//! the threshold. While the neuron "fires" (ARV at or above threshold) the
//! membrane derivative `dv/dt = (-(ARV - target) + R·I) / τ_m` is converted to
//! a current rate `dv/dt / R` and integrated over one control period:
//!
//! `ΔI = gain · ts · (-(ARV - target) + R·I) / (τ_m · R)`.
//!
//! Table values are used as plain numbers in their stated units. The reset
//! to `v_reset` is not applied: the potential is an external measurement.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifControllerParams {
    /// Membrane time constant, s.
    pub tau_m: f64,
    /// Membrane resistance, Ω.
    pub r: f64,
    /// Input current of the LIF neuron, mA.
    pub i_drive: f64,
    /// On-off threshold, µV.
    pub b_target: f64,
    /// Dual-threshold upper target, µV.
    pub t_up: f64,
    /// Dual-threshold lower target, µV.
    pub t_low: f64,
    pub i_min: f64,
    pub i_max: f64,
    /// Control period, s.
    pub ts: f64,
    /// Dimensionless scale on every increment.
    pub gain: f64,
    /// Reset level after firing. Kept for reference; not applied.
    pub v_reset: f64,
}

impl Default for LifControllerParams {
    fn default() -> Self {
        Self {
            tau_m: 5.0,
            r: 0.5,
            i_drive: 5.0,
            b_target: 0.104,
            t_up: 0.104,
            t_low: 0.05207,
            i_min: 0.0,
            i_max: 3.0,
            ts: 0.02,
            gain: 1.0,
            v_reset: 0.0,
        }
    }
}

impl LifControllerParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("{path}.{msg}")));
        if !(self.tau_m.is_finite() && self.tau_m > 0.0) {
            return fail(format!("tau_m: must be > 0, got {}", self.tau_m));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return fail(format!("r: must be > 0, got {}", self.r));
        }
        if !(self.i_min < self.i_max && self.i_min >= 0.0 && self.i_max <= crate::plant::MAX_DBS_MA) {
            return fail(format!(
                "i_min: need 0 <= i_min < i_max <= 3 mA, got [{}, {}]",
                self.i_min, self.i_max
            ));
        }
        if !(self.t_low < self.t_up) {
            return fail(format!(
                "t_low: need t_low < t_up, got {} and {}",
                self.t_low, self.t_up
            ));
        }
        if !(self.b_target.is_finite() && self.b_target > 0.0) {
            return fail(format!("b_target: must be > 0, got {}", self.b_target));
        }
        if !(self.ts.is_finite() && self.ts > 0.0) {
            return fail(format!("ts: must be > 0, got {}", self.ts));
        }
        if !(self.gain.is_finite() && self.gain >= 0.0) {
            return fail(format!("gain: must be >= 0, got {}", self.gain));
        }
        if !self.i_drive.is_finite() {
            return fail("i_drive: must be finite".into());
        }
        Ok(())
    }

    /// Unclamped current change for a suprathreshold ARV against `threshold`.
    pub fn increment(&self, beta_arv: f64, threshold: f64) -> f64 {
        self.gain * self.ts * (-(beta_arv - threshold) + self.r * self.i_drive) / (self.tau_m * self.r)
    }

    fn clamp(&self, i: f64) -> f64 {
        i.clamp(self.i_min, self.i_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LifControllerState {
    /// Commanded DBS amplitude, mA.
    pub i_dbs: f64,
    /// Last ARV seen, µV.
    pub last_arv: f64,
    pub steps: u64,
}

impl LifControllerState {
    pub fn starting_at(i_dbs: f64) -> Self {
        Self {
            i_dbs,
            ..Self::default()
        }
    }
}

fn check_arv(beta_arv: f64) -> Result<()> {
    ensure_arg!(
        beta_arv.is_finite() && beta_arv >= 0.0,
        "beta ARV must be a non-negative number, got {beta_arv}"
    );
    Ok(())
}

/// On-off LIF: increment while the ARV is at or above `b_target`, hold otherwise.
pub fn onoff_lif_step(state: &mut LifControllerState, params: &LifControllerParams, beta_arv: f64) -> Result<f64> {
    check_arv(beta_arv)?;
    if beta_arv >= params.b_target {
        state.i_dbs = params.clamp(state.i_dbs + params.increment(beta_arv, params.b_target));
    }
    state.last_arv = beta_arv;
    state.steps += 1;
    Ok(state.i_dbs)
}

/// Dual-threshold LIF: increment above `t_up`, decrement below `t_low` by the
/// mirrored law, hold in between.
pub fn dual_lif_step(state: &mut LifControllerState, params: &LifControllerParams, beta_arv: f64) -> Result<f64> {
    check_arv(beta_arv)?;
    if beta_arv > params.t_up {
        state.i_dbs = params.clamp(state.i_dbs + params.increment(beta_arv, params.t_up));
    } else if beta_arv < params.t_low {
        let mirrored = params.gain * params.ts * (-(params.t_low - beta_arv) + params.r * params.i_drive)
            / (params.tau_m * params.r);
        state.i_dbs = params.clamp(state.i_dbs - mirrored);
    }
    state.last_arv = beta_arv;
    state.steps += 1;
    Ok(state.i_dbs)
}

/// Open-loop stimulation: the amplitude, unchanged, at every control step.
pub fn open_loop_step(amplitude: f64) -> Result<f64> {
    ensure_arg!(
        (0.0..=crate::plant::MAX_DBS_MA).contains(&amplitude),
        "open-loop amplitude {amplitude} mA outside [0, 3]"
    );
    Ok(amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> LifControllerParams {
        LifControllerParams::default()
    }

    #[test]
    fn onoff_hand_increment() {
        let mut s = LifControllerState::starting_at(1.0);
        let i = onoff_lif_step(&mut s, &defaults(), 0.204).unwrap();
        // 0.02 · (-0.1 + 2.5) / (5 · 0.5)
        assert!((i - 1.0192).abs() < 1e-12, "{i}");
    }

    #[test]
    fn onoff_holds_below_target() {
        let mut s = LifControllerState::starting_at(1.0);
        assert_eq!(onoff_lif_step(&mut s, &defaults(), 0.05).unwrap(), 1.0);
    }

    #[test]
    fn onoff_clamps_at_max() {
        let mut s = LifControllerState::starting_at(2.995);
        assert_eq!(onoff_lif_step(&mut s, &defaults(), 0.204).unwrap(), 3.0);
    }

    #[test]
    fn dual_cases() {
        let p = defaults();
        let mut s = LifControllerState::starting_at(1.0);
        let i = dual_lif_step(&mut s, &p, 0.03).unwrap();
        // -0.02 · (-(0.05207 - 0.03) + 2.5) / 2.5
        assert!((i - (1.0 - 0.02 * (2.5 - 0.02207) / 2.5)).abs() < 1e-12);
        assert!((i - 0.98018).abs() < 1e-5);

        let mut s = LifControllerState::starting_at(1.0);
        assert_eq!(dual_lif_step(&mut s, &p, 0.08).unwrap(), 1.0);

        let mut s = LifControllerState::starting_at(1.0);
        assert!(dual_lif_step(&mut s, &p, 0.2).unwrap() > 1.0);
    }

    #[test]
    fn negative_arv_is_rejected() {
        let mut s = LifControllerState::default();
        assert!(onoff_lif_step(&mut s, &defaults(), -0.1).is_err());
        assert!(dual_lif_step(&mut s, &defaults(), -0.1).is_err());
        assert!(onoff_lif_step(&mut s, &defaults(), f64::NAN).is_err());
    }

    #[test]
    fn open_loop_cases() {
        assert_eq!(open_loop_step(2.5).unwrap(), 2.5);
        assert_eq!(open_loop_step(0.0).unwrap(), 0.0);
        assert!(open_loop_step(3.5).is_err());
    }

    #[test]
    fn invalid_params() {
        let p = LifControllerParams {
            t_low: 0.2,
            ..defaults()
        };
        assert!(p.validate("controller.lif").is_err());
        let p = LifControllerParams {
            tau_m: 0.0,
            ..defaults()
        };
        assert!(p.validate("controller.lif").is_err());
        assert!(defaults().validate("controller.lif").is_ok());
    }
}
