use std::collections::VecDeque;

use crate::dsp::series::TimeSeries;
use crate::error::{ensure_arg, Result};

/// `y_i = |x_i|`, unit preserved.
pub fn full_wave_rectify(x: &TimeSeries) -> TimeSeries {
    x.with_samples(x.samples().iter().map(|v| v.abs()).collect())
}

/// Causal sliding mean over the trailing `len` samples.
///
/// The running sum is kept as deviations from the first sample seen, so a
/// constant input yields exactly that constant. The sum is rebuilt from the
/// buffer once per window length to bound drift.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    len: usize,
    buf: VecDeque<f64>,
    reference: Option<f64>,
    dev_sum: f64,
    since_rebuild: usize,
}

impl MovingAverage {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "moving-average window must hold at least one sample");
        Self {
            len,
            buf: VecDeque::with_capacity(len + 1),
            reference: None,
            dev_sum: 0.0,
            since_rebuild: 0,
        }
    }

    /// Window length in samples for `window` seconds at `fs`.
    pub fn samples_for(window: f64, fs: f64) -> Result<usize> {
        ensure_arg!(
            window.is_finite() && window * fs >= 1.0 - 1e-9,
            "ARV window {window} s is shorter than one sample period at {fs} Hz"
        );
        Ok(((window * fs).round() as usize).max(1))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn push(&mut self, x: f64) -> f64 {
        let reference = *self.reference.get_or_insert(x);
        self.buf.push_back(x);
        self.dev_sum += x - reference;
        if self.buf.len() > self.len {
            let old = self.buf.pop_front().expect("buffer is non-empty");
            self.dev_sum -= old - reference;
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.len {
            self.dev_sum = self.buf.iter().map(|v| v - reference).sum();
            self.since_rebuild = 0;
        }
        reference + self.dev_sum / self.buf.len() as f64
    }
}

/// Beta ARV: trailing-window mean of a rectified series. The first samples
/// average over whatever part of the window is available.
pub fn moving_average_arv(x: &TimeSeries, window: f64) -> Result<TimeSeries> {
    let n = MovingAverage::samples_for(window, x.fs())?;
    let mut avg = MovingAverage::new(n);
    Ok(x.with_samples(x.samples().iter().map(|&v| avg.push(v)).collect()))
}
