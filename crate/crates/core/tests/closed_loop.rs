use cldbs_core::control::{
    dual_lif_step, onoff_lif_step, run_closed_loop, Controller, ControllerKind, DbsWaveformSpec, LifControllerParams,
    LifControllerState,
};
use cldbs_core::dsp::ChainConfig;
use cldbs_core::plant::{build_plant, PlantConfig, Severity, SurrogateConfig};
use cldbs_core::Error;
use proptest::prelude::*;

fn noiseless_plant(seed: u64) -> PlantConfig {
    PlantConfig {
        surrogate: SurrogateConfig::noiseless(),
        ..PlantConfig::surrogate(seed, Severity::Severe)
    }
}

fn run(kind: ControllerKind, duration: f64) -> cldbs_core::Result<cldbs_core::control::SimulationTrace> {
    let mut plant = build_plant(&noiseless_plant(3))?;
    let params = LifControllerParams::default();
    let mut ctl = Controller::new(kind, &params, 2.5);
    run_closed_loop(
        &mut plant,
        &mut ctl,
        duration,
        &ChainConfig::default(),
        20.0,
        &DbsWaveformSpec::default(),
    )
}

#[test]
fn on_off_ramps_then_plateaus() {
    let trace = run(ControllerKind::OnOffLif, 20.0).unwrap();
    let a = trace.amplitude.samples();
    assert!(a.windows(2).all(|w| w[1] >= w[0]), "on-off never decrements");
    assert_eq!(a[0], 0.0);
    let last = *a.last().unwrap();
    assert!(last > 0.5 && last <= 3.0, "{last}");
    // The final quarter holds: the ARV has fallen below target.
    let tail = &a[a.len() * 3 / 4..];
    assert!(tail.iter().all(|&x| x == tail[0]), "plateau expected");
}

#[test]
fn amplitude_changes_only_on_control_ticks() {
    let ts = LifControllerParams::default().ts;
    for kind in [ControllerKind::OnOffLif, ControllerKind::DualLif] {
        let trace = run(kind, 10.0).unwrap();
        let a = trace.amplitude.samples();
        let mut changes = 0;
        for i in 1..a.len() {
            if a[i] != a[i - 1] {
                changes += 1;
                let ticks = trace.amplitude.time_at(i) / ts;
                assert!((ticks - ticks.round()).abs() < 1e-9, "{kind:?} change at sample {i}");
            }
        }
        assert!(changes > 0, "{kind:?}");
    }
}

#[test]
fn trace_series_are_aligned() {
    let trace = run(ControllerKind::DualLif, 6.0).unwrap();
    let n = trace.len();
    assert_eq!(n, 6000);
    for s in trace.series() {
        assert_eq!(s.len(), n);
        assert_eq!(s.fs(), 1000.0);
    }
}

#[test]
fn open_loop_holds_its_amplitude() {
    let trace = run(ControllerKind::OpenLoop, 6.0).unwrap();
    assert!(trace.amplitude.samples().iter().all(|&a| a == 2.5));
}

#[test]
fn dbs_off_delivers_no_current() {
    let trace = run(ControllerKind::DbsOff, 6.0).unwrap();
    assert!(trace.amplitude.samples().iter().all(|&a| a == 0.0));
    assert!(trace.dbs_current.samples().iter().all(|&a| a == 0.0));
}

#[test]
fn short_runs_are_rejected() {
    assert!(matches!(run(ControllerKind::OnOffLif, 1.0), Err(Error::Argument(_))));
}

#[test]
fn saturation_step_count_matches_hand_formula() {
    let p = LifControllerParams::default();
    let arv = 2.0 * p.b_target;
    let di = p.gain * p.ts * (-(arv - p.b_target) + p.r * p.i_drive) / (p.tau_m * p.r);
    let expected = (3.0 / di).ceil() as usize;
    let mut st = LifControllerState::starting_at(0.0);
    let mut steps = 0;
    while st.i_dbs < 3.0 {
        onoff_lif_step(&mut st, &p, arv).unwrap();
        steps += 1;
        assert!(steps <= expected);
    }
    assert_eq!(steps, expected);
    for _ in 0..50 {
        assert_eq!(onoff_lif_step(&mut st, &p, arv).unwrap(), 3.0);
    }
}

fn params_with_gain(gain: f64) -> LifControllerParams {
    LifControllerParams {
        gain,
        ..LifControllerParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn current_stays_clamped(
        start in 0.0f64..=3.0,
        arvs in prop::collection::vec(0.0f64..3.0, 1..200),
        dual in any::<bool>(),
        gain in 0.01f64..20.0,
    ) {
        let p = params_with_gain(gain);
        let mut st = LifControllerState::starting_at(start);
        for a in arvs {
            let i = if dual { dual_lif_step(&mut st, &p, a) } else { onoff_lif_step(&mut st, &p, a) }.unwrap();
            prop_assert!((0.0..=3.0).contains(&i));
        }
    }

    #[test]
    fn on_off_holds_below_target(
        start in 0.0f64..=3.0,
        fracs in prop::collection::vec(0.0f64..1.0, 1..200),
    ) {
        let p = LifControllerParams::default();
        let mut st = LifControllerState::starting_at(start);
        for f in fracs {
            let arv = f * p.b_target;
            prop_assume!(arv < p.b_target);
            prop_assert_eq!(onoff_lif_step(&mut st, &p, arv).unwrap(), start);
        }
    }

    #[test]
    fn dual_deadband_and_directions(
        start in 0.0f64..=3.0,
        fracs in prop::collection::vec(0.0f64..1.0, 1..100),
        region in 0u8..3,
    ) {
        let p = LifControllerParams::default();
        let mut st = LifControllerState::starting_at(start);
        let mut prev = start;
        for f in fracs {
            let arv = match region {
                0 => p.t_low + f * (p.t_up - p.t_low),
                1 => p.t_up + 1e-6 + f * 2.0,
                _ => f * p.t_low,
            };
            let i = dual_lif_step(&mut st, &p, arv).unwrap();
            match region {
                0 if arv > p.t_low && arv < p.t_up => prop_assert_eq!(i, start),
                0 => {}
                1 => prop_assert!(i >= prev),
                _ => prop_assert!(i <= prev),
            }
            prev = i;
        }
    }

    #[test]
    fn doubling_gain_doubles_unclamped_steps(
        start in 0.5f64..1.5,
        excess in 0.0f64..1.0,
        gain in 0.01f64..2.0,
    ) {
        let (p1, p2) = (params_with_gain(gain), params_with_gain(2.0 * gain));
        let arv = p1.b_target + excess;
        let mut s1 = LifControllerState::starting_at(start);
        let mut s2 = LifControllerState::starting_at(start);
        let d1 = onoff_lif_step(&mut s1, &p1, arv).unwrap() - start;
        let d2 = onoff_lif_step(&mut s2, &p2, arv).unwrap() - start;
        prop_assert!(start + 2.0 * d1 < 3.0);
        prop_assert!((d2 - 2.0 * d1).abs() <= 1e-12 * d2.abs().max(1e-300));
        prop_assert_eq!(p2.increment(arv, p2.b_target), 2.0 * p1.increment(arv, p1.b_target));
    }
}
