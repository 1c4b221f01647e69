//! Beta-band extraction: Chebyshev band-pass, rectification, ARV smoothing,
//! and Welch spectral estimates.

mod arv;
mod chain;
pub mod chebyshev;
mod filter;
mod series;
mod spectrum;

pub use arv::{full_wave_rectify, moving_average_arv, MovingAverage};
pub use chain::{BetaChain, ChainConfig, ChainSample};
pub use chebyshev::{design_bandpass, design_beta_bandpass, BandpassDesign, Biquad, ChebyshevKind, FilterCoeffs};
pub use filter::{filter_signal, SosFilter};
pub use series::{TimeSeries, Unit};
pub use spectrum::{band_power, estimate_beta_peak, welch_psd, Spectrum, BETA_BAND, PEAK_MIN_SPAN_S, PEAK_SEGMENT_S};

pub(crate) use filter::same_rate;
