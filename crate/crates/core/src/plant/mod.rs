//! Beta-oscillation plants stepped with an instantaneous DBS current.
//!
//! Two interchangeable modes sit behind [`Plant`]: a conductance-based
//! cortico-basal-ganglia [`network`], and an analytic [`surrogate`] whose
//! beta envelope is a logistic function of the filtered DBS amplitude.

mod lfp;
pub mod network;
mod poisson;
pub mod surrogate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use lfp::LfpWeights;
pub use network::{NetworkConfig, NetworkPlant};
pub use poisson::striatal_spike_trains;
pub use surrogate::{steady_state_beta, SurrogateConfig, SurrogatePlant};

use crate::error::{ensure_arg, Error, Result};

/// Largest DBS current accepted by a plant, mA.
pub const MAX_DBS_MA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlantMode {
    Network,
    #[default]
    Surrogate,
}

/// Parkinsonian severity ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Healthy,
    Mild,
    Moderate,
    #[default]
    Severe,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Healthy, Severity::Mild, Severity::Moderate, Severity::Severe];

    /// Surrogate baseline beta ARV, µV.
    pub fn surrogate_b0(self) -> f64 {
        match self {
            Severity::Healthy => 0.04,
            Severity::Mild => 0.10,
            Severity::Moderate => 0.15,
            Severity::Severe => 0.20,
        }
    }

    /// Multiplier on the network STN bias current.
    pub fn stn_bias_scale(self) -> f64 {
        match self {
            Severity::Healthy => 0.25,
            Severity::Mild => 0.6,
            Severity::Moderate => 0.8,
            Severity::Severe => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Severity::Healthy => "healthy",
            Severity::Mild => "mild",
            Severity::Moderate => "moderate",
            Severity::Severe => "severe",
        }
    }
}

/// How a plant expects its DBS input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    /// The instantaneous pulse-train current, resolved at the plant step.
    PulseTrain,
    /// The stimulation amplitude; the plant is phenomenological in amplitude.
    Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub mode: PlantMode,
    /// Step size, s. `None` uses the mode default.
    pub dt: Option<f64>,
    pub seed: u64,
    pub severity: Severity,
    pub network: NetworkConfig,
    pub surrogate: SurrogateConfig,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            mode: PlantMode::Surrogate,
            dt: None,
            seed: 42,
            severity: Severity::Severe,
            network: NetworkConfig::default(),
            surrogate: SurrogateConfig::default(),
        }
    }
}

impl PlantConfig {
    pub const NETWORK_DT: f64 = 25e-6;
    pub const SURROGATE_DT: f64 = 1e-3;

    pub fn surrogate(seed: u64, severity: Severity) -> Self {
        Self {
            seed,
            severity,
            ..Self::default()
        }
    }

    pub fn network(network: NetworkConfig, seed: u64, severity: Severity) -> Self {
        Self {
            mode: PlantMode::Network,
            seed,
            severity,
            network,
            ..Self::default()
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(match self.mode {
            PlantMode::Network => Self::NETWORK_DT,
            PlantMode::Surrogate => Self::SURROGATE_DT,
        })
    }

    pub fn b0(&self) -> f64 {
        self.surrogate.b0.unwrap_or(self.severity.surrogate_b0())
    }

    pub fn stn_bias_scale(&self) -> f64 {
        self.network.stn_bias_scale.unwrap_or(self.severity.stn_bias_scale())
    }

    pub fn validate(&self) -> Result<()> {
        let dt = self.dt();
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("plant.dt: must be > 0, got {dt}")));
        }
        match self.mode {
            PlantMode::Network => self.network.validate("plant.network"),
            PlantMode::Surrogate => self.surrogate.validate("plant.surrogate"),
        }
    }
}

// One plant exists per run, so the inline surrogate costs nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum Model {
    Surrogate(SurrogatePlant),
    Network(Box<NetworkPlant>),
}

/// A plant instance with its clock. Identical configs give identical trajectories.
#[derive(Debug, Clone)]
pub struct Plant {
    model: Model,
    dt: f64,
    steps: u64,
}

/// Instantiates the plant described by `config`.
pub fn build_plant(config: &PlantConfig) -> Result<Plant> {
    config.validate()?;
    let rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dt = config.dt();
    let model = match config.mode {
        PlantMode::Surrogate => Model::Surrogate(SurrogatePlant::new(&config.surrogate, config.b0(), dt, rng)?),
        PlantMode::Network => Model::Network(Box::new(NetworkPlant::new(
            &config.network,
            dt,
            config.stn_bias_scale(),
            rng,
        )?)),
    };
    Ok(Plant { model, dt, steps: 0 })
}

impl Plant {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Plant clock, s, counted in whole steps.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn drive_kind(&self) -> DriveKind {
        match self.model {
            Model::Surrogate(_) => DriveKind::Amplitude,
            Model::Network(_) => DriveKind::PulseTrain,
        }
    }

    pub fn as_surrogate(&self) -> Option<&SurrogatePlant> {
        match &self.model {
            Model::Surrogate(s) => Some(s),
            Model::Network(_) => None,
        }
    }

    pub fn as_network(&self) -> Option<&NetworkPlant> {
        match &self.model {
            Model::Network(n) => Some(n),
            Model::Surrogate(_) => None,
        }
    }

    /// Advances by `dt` under DBS current `i_dbs` (mA); returns the raw LFP, µV.
    pub fn step(&mut self, i_dbs: f64, dt: f64) -> Result<f64> {
        ensure_arg!(dt > 0.0, "step size must be positive, got {dt}");
        ensure_arg!(
            (dt - self.dt).abs() <= 1e-12 * self.dt,
            "step size {dt} differs from the configured {}",
            self.dt
        );
        ensure_arg!(
            (0.0..=MAX_DBS_MA).contains(&i_dbs),
            "DBS current {i_dbs} mA outside [0, {MAX_DBS_MA}]"
        );
        let lfp = match &mut self.model {
            Model::Surrogate(s) => s.advance(i_dbs),
            Model::Network(n) => n.advance(i_dbs)?,
        };
        self.steps += 1;
        Ok(lfp)
    }
}
