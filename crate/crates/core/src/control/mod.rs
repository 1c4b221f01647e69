//! Stimulation controllers, the DBS waveform, and the closed-loop driver.

mod closed_loop;
mod lif;
mod waveform;

use serde::{Deserialize, Serialize};

pub use closed_loop::{run_closed_loop, RunMeta, SimulationTrace, MIN_RUN_DURATION_S};
pub use lif::{dual_lif_step, onoff_lif_step, open_loop_step, LifControllerParams, LifControllerState};
pub use waveform::{dbs_pulse_train, DbsWaveformSpec};

use crate::error::Result;

/// Which stimulation policy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    DbsOff,
    OpenLoop,
    OnOffLif,
    DualLif,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::DbsOff,
        ControllerKind::OpenLoop,
        ControllerKind::OnOffLif,
        ControllerKind::DualLif,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ControllerKind::DbsOff => "dbs_off",
            ControllerKind::OpenLoop => "open_loop",
            ControllerKind::OnOffLif => "on_off_lif",
            ControllerKind::DualLif => "dual_lif",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }
}

/// A controller instance with its state.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    DbsOff,
    OpenLoop {
        amplitude: f64,
    },
    OnOffLif {
        params: LifControllerParams,
        state: LifControllerState,
    },
    DualLif {
        params: LifControllerParams,
        state: LifControllerState,
    },
}

/// Control period used by the non-LIF policies, s.
pub const DEFAULT_CONTROL_PERIOD_S: f64 = 0.02;

impl Controller {
    pub fn new(kind: ControllerKind, params: &LifControllerParams, open_loop_amplitude: f64) -> Self {
        match kind {
            ControllerKind::DbsOff => Controller::DbsOff,
            ControllerKind::OpenLoop => Controller::OpenLoop {
                amplitude: open_loop_amplitude,
            },
            ControllerKind::OnOffLif => Controller::OnOffLif {
                params: params.clone(),
                state: LifControllerState::starting_at(params.i_min),
            },
            ControllerKind::DualLif => Controller::DualLif {
                params: params.clone(),
                state: LifControllerState::starting_at(params.i_min),
            },
        }
    }

    pub fn kind(&self) -> ControllerKind {
        match self {
            Controller::DbsOff => ControllerKind::DbsOff,
            Controller::OpenLoop { .. } => ControllerKind::OpenLoop,
            Controller::OnOffLif { .. } => ControllerKind::OnOffLif,
            Controller::DualLif { .. } => ControllerKind::DualLif,
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Controller::OnOffLif { params, .. } | Controller::DualLif { params, .. } => params.ts,
            _ => DEFAULT_CONTROL_PERIOD_S,
        }
    }

    /// Currently commanded amplitude, mA.
    pub fn amplitude(&self) -> f64 {
        match self {
            Controller::DbsOff => 0.0,
            Controller::OpenLoop { amplitude } => *amplitude,
            Controller::OnOffLif { state, .. } | Controller::DualLif { state, .. } => state.i_dbs,
        }
    }

    /// One control update from the latest beta ARV; returns the new amplitude.
    pub fn step(&mut self, beta_arv: f64) -> Result<f64> {
        match self {
            Controller::DbsOff => open_loop_step(0.0),
            Controller::OpenLoop { amplitude } => open_loop_step(*amplitude),
            Controller::OnOffLif { params, state } => onoff_lif_step(state, params, beta_arv),
            Controller::DualLif { params, state } => dual_lif_step(state, params, beta_arv),
        }
    }
}
