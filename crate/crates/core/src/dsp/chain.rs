use serde::{Deserialize, Serialize};

use crate::dsp::arv::MovingAverage;
use crate::dsp::chebyshev::{BandpassDesign, ChebyshevKind, FilterCoeffs};
use crate::dsp::filter::SosFilter;
use crate::error::Result;

/// Settings of the beta extraction chain (band-pass, rectifier, ARV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Rate at which the LFP is recorded and filtered.
    pub sample_rate_hz: f64,
    /// Band-pass center. `None` centers on the DBS-off beta peak.
    pub f_center_hz: Option<f64>,
    pub bandwidth_hz: f64,
    pub order: usize,
    pub ripple_db: f64,
    pub kind: ChebyshevKind,
    pub arv_window_s: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 1000.0,
            f_center_hz: None,
            bandwidth_hz: 8.0,
            order: 4,
            ripple_db: 1.0,
            kind: ChebyshevKind::TypeI,
            arv_window_s: 0.1,
        }
    }
}

impl ChainConfig {
    pub fn design(&self, f_center: f64) -> BandpassDesign {
        BandpassDesign {
            fs: self.sample_rate_hz,
            f_center,
            bandwidth: self.bandwidth_hz,
            order: self.order,
            ripple_db: self.ripple_db,
            kind: self.kind,
        }
    }
}

/// Streaming filter -> rectify -> ARV.
#[derive(Debug, Clone)]
pub struct BetaChain {
    coeffs: FilterCoeffs,
    filter: SosFilter,
    arv: MovingAverage,
}

/// One chain output sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSample {
    pub beta: f64,
    pub arv: f64,
}

impl BetaChain {
    /// Builds the chain centered at `f_center`, ignoring `config.f_center_hz`.
    pub fn new(config: &ChainConfig, f_center: f64) -> Result<Self> {
        let coeffs = config.design(f_center).design()?;
        let n = MovingAverage::samples_for(config.arv_window_s, config.sample_rate_hz)?;
        Ok(Self {
            filter: SosFilter::new(&coeffs),
            coeffs,
            arv: MovingAverage::new(n),
        })
    }

    pub fn coeffs(&self) -> &FilterCoeffs {
        &self.coeffs
    }

    pub fn push(&mut self, raw: f64) -> ChainSample {
        let beta = self.filter.process_sample(raw);
        let arv = self.arv.push(beta.abs());
        ChainSample { beta, arv }
    }
}
