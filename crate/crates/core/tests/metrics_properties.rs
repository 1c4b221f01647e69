use cldbs_core::dsp::{TimeSeries, Unit};
use cldbs_core::metrics::{
    error_signal, mse, mse_percent, power_consumption, suppression_efficiency, trapezoid, EfficiencyVariant,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn ts(xs: Vec<f64>, unit: Unit) -> TimeSeries {
    TimeSeries::from_samples(xs, 1000.0, unit).unwrap()
}

#[test]
fn constant_current_power_closed_form() {
    let i = ts(vec![2.5; 30_001], Unit::Milliampere);
    let p = power_consumption(&i, 500.0, 30.0).unwrap();
    assert!(close(p, 3.125e-3, 1e-9), "{p}");
}

#[test]
fn error_and_mse_hand_cases() {
    let e = error_signal(&ts(vec![0.208, 0.104, 0.0], Unit::Microvolt), 0.104).unwrap();
    assert_eq!(e.samples(), &[1.0, 0.0, -1.0]);
    // Constant unit error over one second.
    let ones = ts(vec![1.0; 1001], Unit::Dimensionless);
    assert!(close(mse(&ones, 1.0).unwrap(), 1.0, 1e-12));
    assert_eq!(mse_percent(0.25, 0.25).unwrap(), 100.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mse_scales_quadratically(
        xs in prop::collection::vec(-5.0f64..5.0, 2..400),
        c in -20.0f64..20.0,
        t_sim in 0.1f64..60.0,
    ) {
        let e = ts(xs.clone(), Unit::Dimensionless);
        let scaled = ts(xs.iter().map(|x| c * x).collect(), Unit::Dimensionless);
        let (m, mc) = (mse(&e, t_sim).unwrap(), mse(&scaled, t_sim).unwrap());
        prop_assert!(m >= 0.0);
        prop_assert!(close(mc, c * c * m, 1e-12) || (mc < 1e-290 && m * c * c < 1e-290));
    }

    #[test]
    fn power_scales_quadratically(
        xs in prop::collection::vec(0.0f64..1.0, 2..400),
        c in 0.0f64..3.0,
        z_e in 1.0f64..5000.0,
    ) {
        let i = ts(xs.clone(), Unit::Milliampere);
        let scaled = ts(xs.iter().map(|x| c * x).collect(), Unit::Milliampere);
        let (p, pc) = (power_consumption(&i, z_e, 1.0).unwrap(), power_consumption(&scaled, z_e, 1.0).unwrap());
        prop_assert!(p >= 0.0);
        prop_assert!(close(pc, c * c * p, 1e-12) || pc == 0.0);
    }

    #[test]
    fn baseline_against_itself_is_one_hundred_percent(m in 1e-12f64..1e6) {
        prop_assert_eq!(mse_percent(m, m).unwrap(), 100.0);
    }

    #[test]
    fn trapezoid_matches_closed_forms(
        a in -100.0f64..100.0,
        b in -100.0f64..100.0,
        n in 2usize..5000,
        dt in 1e-4f64..1.0,
    ) {
        let lin: Vec<f64> = (0..n).map(|k| a + b * k as f64 * dt).collect();
        let t = (n - 1) as f64 * dt;
        let exact_lin = a * t + 0.5 * b * t * t;
        let got = trapezoid(&lin, dt);
        // Relative to the integrand's magnitude, so sign cancellation cannot blow it up.
        let scale = a.abs() * t + 0.5 * b.abs() * t * t;
        prop_assert!((got - exact_lin).abs() <= 1e-12 * scale, "{} vs {}", got, exact_lin);
        let konst = vec![a; n];
        prop_assert!(close(trapezoid(&konst, dt), a * t, 1e-12) || a == 0.0);
    }

    #[test]
    fn efficiency_is_monotone(
        off in prop::collection::vec(0.05f64..0.3, 2..200),
        s1 in 0.0f64..0.5,
        ds in 0.01f64..0.4,
        p1 in 0.1f64..100.0,
        dp in 0.1f64..100.0,
    ) {
        let b_off = ts(off.clone(), Unit::Microvolt);
        let ctrl = |s: f64| ts(off.iter().map(|b| b * (1.0 - s)).collect(), Unit::Microvolt);
        let std = EfficiencyVariant::Standard;
        let e = suppression_efficiency(&b_off, &ctrl(s1), p1, std).unwrap();
        let more_power = suppression_efficiency(&b_off, &ctrl(s1), p1 + dp, std).unwrap();
        let more_supp = suppression_efficiency(&b_off, &ctrl(s1 + ds), p1, std).unwrap();
        prop_assert!(more_power <= e);
        prop_assert!(more_supp > e);
    }
}
