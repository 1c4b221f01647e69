use std::f64::consts::PI;

use cldbs_core::dsp::chebyshev::{BandpassDesign, ChebyshevKind};
use cldbs_core::dsp::{
    estimate_beta_peak, filter_signal, full_wave_rectify, moving_average_arv, welch_psd, SosFilter, TimeSeries, Unit,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn series(xs: Vec<f64>, fs: f64) -> TimeSeries {
    TimeSeries::from_samples(xs, fs, Unit::Microvolt).unwrap()
}

fn noisy_tones(tones: &[(f64, f64)], noise: f64, n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let w: f64 = StandardNormal.sample(&mut rng);
            tones.iter().map(|(f, a)| a * (2.0 * PI * f * t).sin()).sum::<f64>() + noise * w
        })
        .collect()
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / xs.len() as f64
}

#[test]
fn full_wave_rectified_sine_has_mean_two_over_pi() {
    let fs = 2000.0;
    let n = (100.0 * fs / 20.0) as usize;
    let xs: Vec<f64> = (0..n).map(|i| (2.0 * PI * 20.0 * i as f64 / fs).sin()).collect();
    let r = full_wave_rectify(&series(xs, fs));
    assert!((r.mean() / (2.0 / PI) - 1.0).abs() < 0.005);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn designed_poles_are_stable(
        fs in 250.0f64..4000.0,
        fc in 13.0f64..30.0,
        half_order in 1usize..5,
        type_two in any::<bool>(),
    ) {
        let design = BandpassDesign {
            order: 2 * half_order,
            kind: if type_two { ChebyshevKind::TypeII } else { ChebyshevKind::TypeI },
            ripple_db: if type_two { 40.0 } else { 1.0 },
            ..BandpassDesign::beta(fs, fc)
        };
        let c = design.design().unwrap();
        prop_assert_eq!(c.sections.len(), half_order);
        for p in c.poles() {
            prop_assert!(p.norm() < 1.0, "pole {} at fs {} fc {}", p, fs, fc);
        }
    }

    #[test]
    fn chunked_filtering_is_bit_identical(
        xs in prop::collection::vec(-100.0f64..100.0, 1..600),
        cuts in prop::collection::vec(0usize..600, 0..8),
        fc in 13.0f64..30.0,
    ) {
        let c = BandpassDesign::beta(1000.0, fc).design().unwrap();
        let whole = filter_signal(&c, &series(xs.clone(), 1000.0)).unwrap();
        let mut cuts: Vec<usize> = cuts.into_iter().map(|k| k % (xs.len() + 1)).collect();
        cuts.push(0);
        cuts.push(xs.len());
        cuts.sort_unstable();
        let mut f = SosFilter::new(&c);
        let mut chunked = Vec::with_capacity(xs.len());
        for w in cuts.windows(2) {
            chunked.extend(f.process(&xs[w[0]..w[1]]));
        }
        prop_assert_eq!(whole.samples(), chunked.as_slice());
    }

    #[test]
    fn rectifier_is_idempotent(xs in prop::collection::vec(-1e6f64..1e6, 1..300)) {
        let once = full_wave_rectify(&series(xs, 1000.0));
        let twice = full_wave_rectify(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn arv_stays_within_window_bounds(
        xs in prop::collection::vec(-50.0f64..50.0, 1..400),
        window_samples in 1usize..120,
    ) {
        let fs = 1000.0;
        let r = full_wave_rectify(&series(xs.clone(), fs));
        let arv = moving_average_arv(&r, window_samples as f64 / fs).unwrap();
        for (i, &a) in arv.samples().iter().enumerate() {
            let lo = i.saturating_sub(window_samples - 1);
            let max = xs[lo..=i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // Running sums may round by a few ulps.
            prop_assert!(a >= -1e-12 && a <= max * (1.0 + 1e-12) + 1e-12, "{} vs {}", a, max);
        }
    }

    #[test]
    fn constant_input_gives_exact_arv(c in 0.0f64..10.0, n in 1usize..500) {
        let arv = moving_average_arv(&series(vec![c; n], 1000.0), 0.2).unwrap();
        prop_assert!(arv.samples().iter().all(|&a| a == c));
    }

    #[test]
    fn welch_total_power_matches_variance(
        tones in prop::collection::vec((2.0f64..400.0, 0.1f64..5.0), 0..4),
        noise in 0.1f64..3.0,
        seed in any::<u64>(),
    ) {
        let fs = 1000.0;
        let xs = noisy_tones(&tones, noise, 20_000, fs, seed);
        let var = variance(&xs);
        let s = welch_psd(&series(xs, fs), 2.0, 0.5).unwrap();
        prop_assert!((s.total_power() / var - 1.0).abs() < 0.05, "{} vs {}", s.total_power(), var);
    }

    #[test]
    fn peak_ignores_positive_scaling(
        f_peak in 14.0f64..29.0,
        scale in 1e-3f64..1e3,
        seed in any::<u64>(),
    ) {
        let fs = 1000.0;
        let xs = noisy_tones(&[(f_peak, 1.0)], 0.5, 5000, fs, seed);
        let scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
        let a = estimate_beta_peak(&series(xs, fs)).unwrap();
        let b = estimate_beta_peak(&series(scaled, fs)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((a - f_peak).abs() <= 0.5);
    }
}
