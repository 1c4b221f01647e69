//! Chebyshev band-pass design as a cascade of second-order sections.
//!
//! The analog low-pass prototype of order `order / 2` is mapped to a
//! band-pass with the standard `s -> (s^2 + w0^2) / (B s)` substitution,
//! discretized with the bilinear transform (band edges pre-warped), and
//! factored into biquads. A band-pass of order `N` therefore has `N / 2`
//! sections.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PAIR_TOL: f64 = 1e-10;

/// Which Chebyshev family to design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChebyshevKind {
    /// Equiripple passband; `ripple_db` is the passband ripple and the band
    /// edges are the ripple edges.
    #[default]
    TypeI,
    /// Equiripple stopband; `ripple_db` is the minimum stopband attenuation
    /// and the band edges are where that attenuation is first reached.
    TypeII,
}

/// One biquad, `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b0 + z_inv * self.b1 + z2 * self.b2;
        let den = 1.0 + z_inv * self.a1 + z2 * self.a2;
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        quadratic_roots(self.a1, self.a2)
    }
}

/// A designed band-pass: the section cascade plus the design inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoeffs {
    pub sections: Vec<Biquad>,
    pub kind: ChebyshevKind,
    pub order: usize,
    pub f_center: f64,
    pub bandwidth: f64,
    pub ripple_db: f64,
    pub fs: f64,
}

impl FilterCoeffs {
    /// Complex response of the cascade at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |h, s| h * s.response(z_inv))
    }

    pub fn gain_db(&self, f: f64) -> f64 {
        20.0 * self.response(f).norm().log10()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn band_edges(&self) -> (f64, f64) {
        (
            self.f_center - self.bandwidth / 2.0,
            self.f_center + self.bandwidth / 2.0,
        )
    }
}

/// Band-pass design request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassDesign {
    pub fs: f64,
    pub f_center: f64,
    pub bandwidth: f64,
    pub order: usize,
    pub ripple_db: f64,
    pub kind: ChebyshevKind,
}

impl BandpassDesign {
    pub fn beta(fs: f64, f_center: f64) -> Self {
        Self {
            fs,
            f_center,
            bandwidth: 8.0,
            order: 4,
            ripple_db: 1.0,
            kind: ChebyshevKind::TypeI,
        }
    }

    pub fn design(&self) -> Result<FilterCoeffs> {
        design_bandpass(self)
    }
}

/// Chebyshev type-I band-pass with passband `f_center ± bandwidth / 2`.
pub fn design_beta_bandpass(
    fs: f64,
    f_center: f64,
    bandwidth: f64,
    order: usize,
    ripple_db: f64,
) -> Result<FilterCoeffs> {
    design_bandpass(&BandpassDesign {
        fs,
        f_center,
        bandwidth,
        order,
        ripple_db,
        kind: ChebyshevKind::TypeI,
    })
}

pub fn design_bandpass(spec: &BandpassDesign) -> Result<FilterCoeffs> {
    let BandpassDesign {
        fs,
        f_center,
        bandwidth,
        order,
        ripple_db,
        kind,
    } = *spec;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::Design(format!("sampling rate must be positive, got {fs}")));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::Design(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if order < 2 || order % 2 != 0 {
        return Err(Error::Design(format!(
            "band-pass order must be even and at least 2, got {order}"
        )));
    }
    if !(ripple_db.is_finite() && ripple_db > 0.0) {
        return Err(Error::Design(format!("ripple must be positive dB, got {ripple_db}")));
    }
    let f_lo = f_center - bandwidth / 2.0;
    let f_hi = f_center + bandwidth / 2.0;
    let nyquist = fs / 2.0;
    if !(f_lo > 0.0 && f_hi < nyquist) {
        return Err(Error::Design(format!(
            "band edges [{f_lo}, {f_hi}] Hz must lie strictly inside (0, {nyquist}) Hz"
        )));
    }

    let n = order / 2;
    let proto = match kind {
        ChebyshevKind::TypeI => cheb1_prototype(n, ripple_db),
        ChebyshevKind::TypeII => cheb2_prototype(n, ripple_db),
    };

    let fs2 = 2.0 * fs;
    let w_lo = fs2 * (PI * f_lo / fs).tan();
    let w_hi = fs2 * (PI * f_hi / fs).tan();
    let analog = lowpass_to_bandpass(&proto, (w_lo * w_hi).sqrt(), w_hi - w_lo);
    let digital = bilinear(&analog, fs2);
    let sections = zpk_to_sections(&digital)?;

    for (i, s) in sections.iter().enumerate() {
        for p in s.poles() {
            if p.norm() >= 1.0 {
                return Err(Error::Design(format!(
                    "section {i} has a pole with modulus {} (unstable)",
                    p.norm()
                )));
            }
        }
    }

    Ok(FilterCoeffs {
        sections,
        kind,
        order,
        f_center,
        bandwidth,
        ripple_db,
        fs,
    })
}

#[derive(Debug, Clone)]
struct Zpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
}

fn cheb1_prototype(n: usize, ripple_db: f64) -> Zpk {
    let eps = (10f64.powf(ripple_db / 10.0) - 1.0).sqrt();
    let mu = (1.0 / eps).asinh() / n as f64;
    let poles: Vec<Complex64> = (1..=n)
        .map(|k| {
            let theta = PI * (2 * k - 1) as f64 / (2 * n) as f64;
            Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * theta.cos())
        })
        .collect();
    let mut gain = poles.iter().fold(Complex64::new(1.0, 0.0), |g, p| g * -p).re;
    if n.is_multiple_of(2) {
        gain /= (1.0 + eps * eps).sqrt();
    }
    Zpk {
        zeros: Vec::new(),
        poles,
        gain,
    }
}

fn cheb2_prototype(n: usize, atten_db: f64) -> Zpk {
    let eps = 1.0 / (10f64.powf(atten_db / 10.0) - 1.0).sqrt();
    let mu = (1.0 / eps).asinh() / n as f64;
    let mut zeros = Vec::new();
    let mut poles = Vec::new();
    for k in 1..=n {
        let theta = PI * (2 * k - 1) as f64 / (2 * n) as f64;
        let c = theta.cos();
        if c.abs() > 1e-12 {
            zeros.push(Complex64::new(0.0, 1.0 / c));
        }
        let p = Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * c);
        poles.push(1.0 / p);
    }
    let num = poles.iter().fold(Complex64::new(1.0, 0.0), |g, p| g * -p);
    let den = zeros.iter().fold(Complex64::new(1.0, 0.0), |g, z| g * -z);
    Zpk {
        zeros,
        poles,
        gain: (num / den).re,
    }
}

fn lowpass_to_bandpass(proto: &Zpk, w0: f64, bw: f64) -> Zpk {
    let map = |r: &Complex64| {
        let half = r * (bw / 2.0);
        let disc = (half * half - w0 * w0).sqrt();
        [half + disc, half - disc]
    };
    let degree = proto.poles.len() - proto.zeros.len();
    let mut zeros: Vec<Complex64> = proto.zeros.iter().flat_map(map).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), degree));
    Zpk {
        zeros,
        poles: proto.poles.iter().flat_map(map).collect(),
        gain: proto.gain * bw.powi(degree as i32),
    }
}

fn bilinear(analog: &Zpk, fs2: f64) -> Zpk {
    let warp = |r: &Complex64| (fs2 + r) / (fs2 - r);
    let degree = analog.poles.len() - analog.zeros.len();
    let mut zeros: Vec<Complex64> = analog.zeros.iter().map(warp).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), degree));
    let num = analog.zeros.iter().fold(Complex64::new(1.0, 0.0), |g, z| g * (fs2 - z));
    let den = analog.poles.iter().fold(Complex64::new(1.0, 0.0), |g, p| g * (fs2 - p));
    Zpk {
        zeros,
        poles: analog.poles.iter().map(warp).collect(),
        gain: analog.gain * (num / den).re,
    }
}

/// Splits roots into conjugate pairs; real roots are paired outermost-first
/// so that a band-pass's `+1` and `-1` zeros share a section.
fn conjugate_pairs(roots: &[Complex64]) -> Result<Vec<[Complex64; 2]>> {
    let mut upper: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > PAIR_TOL).collect();
    let lower = roots.iter().filter(|r| r.im < -PAIR_TOL).count();
    if upper.len() != lower {
        return Err(Error::Design("complex roots do not come in conjugate pairs".into()));
    }
    let mut reals: Vec<f64> = roots.iter().filter(|r| r.im.abs() <= PAIR_TOL).map(|r| r.re).collect();
    if !reals.len().is_multiple_of(2) {
        return Err(Error::Design("odd number of real roots".into()));
    }
    reals.sort_by(f64::total_cmp);
    upper.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut pairs: Vec<[Complex64; 2]> = upper.into_iter().map(|r| [r, r.conj()]).collect();
    let m = reals.len();
    for i in 0..m / 2 {
        pairs.push([Complex64::new(reals[i], 0.0), Complex64::new(reals[m - 1 - i], 0.0)]);
    }
    Ok(pairs)
}

fn zpk_to_sections(zpk: &Zpk) -> Result<Vec<Biquad>> {
    let mut pole_pairs = conjugate_pairs(&zpk.poles)?;
    let mut zero_pairs = conjugate_pairs(&zpk.zeros)?;
    if pole_pairs.len() != zero_pairs.len() {
        return Err(Error::Design("pole and zero counts differ".into()));
    }
    pole_pairs.sort_by(|a, b| b[0].norm().total_cmp(&a[0].norm()));

    let n = pole_pairs.len();
    let per_section = zpk.gain.abs().powf(1.0 / n as f64);
    let mut sections = Vec::with_capacity(n);
    for (i, poles) in pole_pairs.iter().enumerate() {
        // Nearest remaining zero pair to this pole pair.
        let (j, _) = zero_pairs
            .iter()
            .enumerate()
            .map(|(j, z)| (j, (z[0] - poles[0]).norm().min((z[1] - poles[0]).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("zero pairs remain while pole pairs remain");
        let zeros = zero_pairs.swap_remove(j);
        let mut g = per_section;
        if i == 0 && zpk.gain < 0.0 {
            g = -g;
        }
        sections.push(Biquad {
            b0: g,
            b1: -g * (zeros[0] + zeros[1]).re,
            b2: g * (zeros[0] * zeros[1]).re,
            a1: -(poles[0] + poles[1]).re,
            a2: (poles[0] * poles[1]).re,
        });
    }
    Ok(sections)
}

fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form Chebyshev magnitude of the pre-warped band-pass, independent
    /// of the pole/zero route.
    fn analog_gain_db(fs: f64, f_lo: f64, f_hi: f64, n: usize, ripple: f64, f: f64) -> f64 {
        let w = |f: f64| (PI * f / fs).tan();
        let (wl, wh, wf) = (w(f_lo), w(f_hi), w(f));
        let omega = (wf * wf - wl * wh) / (wf * (wh - wl));
        let t = if omega.abs() <= 1.0 {
            (n as f64 * omega.acos()).cos()
        } else {
            (n as f64 * omega.abs().acosh()).cosh()
        };
        let eps2 = 10f64.powf(ripple / 10.0) - 1.0;
        -10.0 * (1.0 + eps2 * t * t).log10()
    }

    #[test]
    fn matches_closed_form_magnitude() {
        let c = design_beta_bandpass(2000.0, 20.0, 8.0, 4, 1.0).unwrap();
        assert_eq!(c.sections.len(), 2);
        for f in [2.0, 10.0, 15.0, 16.0, 18.0, 20.0, 22.0, 24.0, 30.0, 40.0, 200.0] {
            let a = analog_gain_db(2000.0, 16.0, 24.0, 2, 1.0, f);
            assert!((c.gain_db(f) - a).abs() < 1e-6, "f={f}: {} vs {a}", c.gain_db(f));
        }
    }

    #[test]
    fn higher_orders_and_other_rates() {
        for (fs, fc, order) in [
            (1000.0, 20.0, 4),
            (1000.0, 25.0, 6),
            (40000.0, 20.0, 4),
            (500.0, 14.0, 8),
        ] {
            let c = design_beta_bandpass(fs, fc, 8.0, order, 0.5).unwrap();
            assert_eq!(c.sections.len(), order / 2);
            assert!(c.poles().iter().all(|p| p.norm() < 1.0));
            for f in [fc - 10.0, fc - 3.0, fc, fc + 2.0, fc + 15.0] {
                let a = analog_gain_db(fs, fc - 4.0, fc + 4.0, order / 2, 0.5, f);
                assert!((c.gain_db(f) - a).abs() < 1e-5, "fs={fs} order={order} f={f}");
            }
        }
    }

    #[test]
    fn type_two_band_edges_hit_attenuation() {
        let c = design_bandpass(&BandpassDesign {
            kind: ChebyshevKind::TypeII,
            ripple_db: 30.0,
            ..BandpassDesign::beta(1000.0, 20.0)
        })
        .unwrap();
        assert!((c.gain_db(16.0) + 30.0).abs() < 1e-6);
        assert!((c.gain_db(24.0) + 30.0).abs() < 1e-6);
        eprintln!("center {}", c.gain_db(20.0));
        assert!(c.gain_db(20.0) > -0.2 && c.gain_db(20.0) < 1e-9);
        assert!(c.gain_db(50.0) <= -30.0 + 1e-9);
    }

    #[test]
    fn rejects_edges_outside_nyquist() {
        assert!(matches!(
            design_beta_bandpass(2000.0, 999.0, 8.0, 4, 1.0),
            Err(Error::Design(_))
        ));
        assert!(design_beta_bandpass(2000.0, 3.0, 8.0, 4, 1.0).is_err());
        assert!(design_beta_bandpass(2000.0, 20.0, 8.0, 3, 1.0).is_err());
    }
}
