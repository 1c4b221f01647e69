use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::series::TimeSeries;
use crate::error::{ensure_arg, Result};

/// Lower and upper edge of the beta band, Hz.
pub const BETA_BAND: (f64, f64) = (13.0, 30.0);

/// Segment length used by [`estimate_beta_peak`] (0.5 Hz resolution).
pub const PEAK_SEGMENT_S: f64 = 2.0;

/// Minimum signal span accepted by [`estimate_beta_peak`].
pub const PEAK_MIN_SPAN_S: f64 = 3.0;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
    pub resolution: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// `Σ density · Δf` over every bin.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution
    }
}

/// Hann-windowed Welch estimate with per-segment mean removal.
///
/// Densities are scaled so that `Σ PSD · Δf` estimates the signal variance.
pub fn welch_psd(x: &TimeSeries, segment: f64, overlap: f64) -> Result<Spectrum> {
    ensure_arg!(
        (0.0..1.0).contains(&overlap),
        "overlap must lie in [0, 1), got {overlap}"
    );
    let fs = x.fs();
    let nseg = (segment * fs).round();
    ensure_arg!(
        segment.is_finite() && nseg >= 8.0,
        "segment of {segment} s holds fewer than 8 samples at {fs} Hz"
    );
    let nseg = nseg as usize;
    ensure_arg!(
        nseg <= x.len(),
        "segment of {nseg} samples is longer than the signal ({} samples)",
        x.len()
    );
    let step = (nseg - (overlap * nseg as f64).round() as usize).max(1);

    let window: Vec<f64> = (0..nseg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nseg as f64).cos())
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(nseg);
    let nbins = nseg / 2 + 1;
    let mut acc = vec![0.0; nbins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nseg];
    let mut count = 0usize;
    let xs = x.samples();
    let mut start = 0;
    while start + nseg <= xs.len() {
        let seg = &xs[start..start + nseg];
        let mean = seg.iter().sum::<f64>() / nseg as f64;
        for ((b, &v), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }

    let scale = 1.0 / (fs * window_power * count as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = k != 0 && !(nseg.is_multiple_of(2) && k == nseg / 2);
            p * scale * if one_sided { 2.0 } else { 1.0 }
        })
        .collect();
    let resolution = fs / nseg as f64;
    Ok(Spectrum {
        freqs: (0..nbins).map(|k| k as f64 * resolution).collect(),
        density,
        resolution,
    })
}

/// `Σ PSD · Δf` over bins with `f_lo <= f < f_hi`. The top bin of the
/// spectrum is included when `f_hi` equals its frequency, so a band ending at
/// Nyquist covers the whole spectrum.
pub fn band_power(s: &Spectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    ensure_arg!(f_lo < f_hi, "band [{f_lo}, {f_hi}) is empty");
    let top = s.freqs.last().copied().unwrap_or(0.0);
    let mut total = 0.0;
    let mut bins = 0;
    for (&f, &p) in s.freqs.iter().zip(&s.density) {
        if (f >= f_lo && f < f_hi) || (f == top && f == f_hi) {
            total += p;
            bins += 1;
        }
    }
    ensure_arg!(bins > 0, "band [{f_lo}, {f_hi}) contains no spectral bins");
    Ok(total * s.resolution)
}

/// Frequency of the largest Welch density inside the beta band.
pub fn estimate_beta_peak(x: &TimeSeries) -> Result<f64> {
    ensure_arg!(
        x.duration() >= PEAK_MIN_SPAN_S - 1e-9,
        "beta peak estimation needs at least {PEAK_MIN_SPAN_S} s, got {} s",
        x.duration()
    );
    let s = welch_psd(x, PEAK_SEGMENT_S, 0.5)?;
    let (lo, hi) = BETA_BAND;
    s.freqs
        .iter()
        .zip(&s.density)
        .filter(|(&f, _)| (lo..=hi).contains(&f))
        .fold(None, |best: Option<(f64, f64)>, (&f, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((f, p)),
        })
        .map(|(f, _)| f)
        .ok_or_else(|| crate::Error::Argument("no spectral bins inside the beta band".into()))
}
