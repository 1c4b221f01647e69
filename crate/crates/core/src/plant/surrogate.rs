//! Analytic beta-envelope plant.
//!
//! The DBS amplitude is low-pass filtered (`tau_p`) and mapped through a
//! logistic suppression curve to a baseline beta ARV; an Ornstein-Uhlenbeck
//! process perturbs it. The LFP is a beta tone whose amplitude reproduces
//! that ARV after rectification (`A = π/2 · b`), plus white background noise.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Baseline beta ARV, µV. `None` takes it from the severity.
    pub b0: Option<f64>,
    /// Amplitude giving half suppression, mA.
    pub i50: f64,
    /// Logistic steepness, 1/mA.
    pub k: f64,
    /// Beta tone frequency, Hz.
    pub f_beta: f64,
    /// Time constant of the DBS low-pass, s.
    pub tau_p: f64,
    /// Ornstein-Uhlenbeck time constant, s.
    pub ou_tau_s: f64,
    /// Stationary standard deviation of the OU perturbation, µV.
    pub ou_std_uv: f64,
    /// Standard deviation of the white background noise, µV.
    pub background_std_uv: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            b0: None,
            i50: 1.5,
            k: 2.0,
            f_beta: 20.0,
            tau_p: 0.1,
            ou_tau_s: 0.5,
            ou_std_uv: 0.01,
            background_std_uv: 0.2,
        }
    }
}

impl SurrogateConfig {
    pub fn noiseless() -> Self {
        Self {
            ou_std_uv: 0.0,
            background_std_uv: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::Config(format!("{path}.{field}: {msg}")));
        if let Some(b0) = self.b0 {
            if !(b0.is_finite() && b0 > 0.0) {
                return fail("b0", format!("must be > 0, got {b0}"));
            }
        }
        if !(0.0..=3.0).contains(&self.i50) {
            return fail("i50", format!("must lie in [0, 3] mA, got {}", self.i50));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return fail("k", format!("must be > 0, got {}", self.k));
        }
        if !(13.0..=30.0).contains(&self.f_beta) {
            return fail("f_beta", format!("must lie in [13, 30] Hz, got {}", self.f_beta));
        }
        if !(self.tau_p.is_finite() && self.tau_p > 0.0) {
            return fail("tau_p", format!("must be > 0, got {}", self.tau_p));
        }
        if !(self.ou_tau_s.is_finite() && self.ou_tau_s > 0.0) {
            return fail("ou_tau_s", format!("must be > 0, got {}", self.ou_tau_s));
        }
        if !(self.ou_std_uv >= 0.0 && self.background_std_uv >= 0.0) {
            return fail("ou_std_uv", "noise levels must be >= 0".into());
        }
        Ok(())
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Noise-free steady-state beta ARV under a sustained amplitude.
pub fn steady_state_beta(b0: f64, config: &SurrogateConfig, i_dbs: f64) -> f64 {
    b0 * logistic(config.k * (config.i50 - i_dbs))
}

#[derive(Debug, Clone)]
pub struct SurrogatePlant {
    config: SurrogateConfig,
    b0: f64,
    dt: f64,
    step: u64,
    phase: f64,
    dbs_decay: f64,
    ou_decay: f64,
    ou_kick: f64,
    filtered_dbs: f64,
    ou: f64,
    b_inst: f64,
    rng: ChaCha8Rng,
}

impl SurrogatePlant {
    pub fn new(config: &SurrogateConfig, b0: f64, dt: f64, mut rng: ChaCha8Rng) -> Result<Self> {
        config.validate("plant.surrogate")?;
        let phase = rng.random_range(0.0..2.0 * PI);
        let ou_decay = (-dt / config.ou_tau_s).exp();
        Ok(Self {
            b0,
            dt,
            step: 0,
            phase,
            dbs_decay: (-dt / config.tau_p).exp(),
            ou_decay,
            ou_kick: config.ou_std_uv * (1.0 - ou_decay * ou_decay).sqrt(),
            filtered_dbs: 0.0,
            ou: 0.0,
            b_inst: steady_state_beta(b0, config, 0.0),
            config: config.clone(),
            rng,
        })
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Instantaneous beta ARV of the last step, µV.
    pub fn b_inst(&self) -> f64 {
        self.b_inst
    }

    /// Low-pass filtered DBS amplitude, mA.
    pub fn filtered_dbs(&self) -> f64 {
        self.filtered_dbs
    }

    pub(crate) fn advance(&mut self, i_dbs: f64) -> f64 {
        let t = self.step as f64 * self.dt;
        self.filtered_dbs = i_dbs + (self.filtered_dbs - i_dbs) * self.dbs_decay;
        let z_ou: f64 = StandardNormal.sample(&mut self.rng);
        let z_bg: f64 = StandardNormal.sample(&mut self.rng);
        self.ou = self.ou * self.ou_decay + self.ou_kick * z_ou;
        self.b_inst = steady_state_beta(self.b0, &self.config, self.filtered_dbs) + self.ou;
        self.step += 1;
        let amplitude = FRAC_PI_2 * self.b_inst;
        amplitude * (2.0 * PI * self.config.f_beta * t + self.phase).sin() + self.config.background_std_uv * z_bg
    }
}
