use crate::dsp::chebyshev::{Biquad, FilterCoeffs};
use crate::dsp::series::TimeSeries;
use crate::error::{ensure_arg, Result};

/// Streaming cascade of biquads in transposed direct form II.
///
/// State is carried across calls, so filtering a signal in chunks gives the
/// same samples as filtering it in one call.
#[derive(Debug, Clone)]
pub struct SosFilter {
    sections: Vec<Biquad>,
    state: Vec<[f64; 2]>,
    fs: f64,
}

impl SosFilter {
    pub fn new(coeffs: &FilterCoeffs) -> Self {
        Self {
            sections: coeffs.sections.clone(),
            state: vec![[0.0; 2]; coeffs.sections.len()],
            fs: coeffs.fs,
        }
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = [0.0; 2]);
    }

    #[inline]
    pub fn process_sample(&mut self, x: f64) -> f64 {
        let mut y = x;
        for (c, s) in self.sections.iter().zip(self.state.iter_mut()) {
            let input = y;
            y = c.b0 * input + s[0];
            s[0] = c.b1 * input - c.a1 * y + s[1];
            s[1] = c.b2 * input - c.a2 * y;
        }
        y
    }

    pub fn process(&mut self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.process_sample(x)).collect()
    }
}

pub(crate) fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Causal, zero-initial-state application of `coeffs` to `x`.
pub fn filter_signal(coeffs: &FilterCoeffs, x: &TimeSeries) -> Result<TimeSeries> {
    ensure_arg!(
        same_rate(coeffs.fs, x.fs()),
        "signal sampled at {} Hz but filter designed for {} Hz",
        x.fs(),
        coeffs.fs
    );
    let mut filter = SosFilter::new(coeffs);
    Ok(x.with_samples(filter.process(x.samples())))
}
