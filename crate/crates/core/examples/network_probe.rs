//! Prints beta-band statistics of the reduced network plant.
//!
//! Usage: `network_probe [network.json] [population size] [seconds] [seed]`

use std::time::Instant;

use cldbs_core::control::DbsWaveformSpec;
use cldbs_core::dsp::{band_power, welch_psd, TimeSeries, Unit};
use cldbs_core::plant::network::{NetworkConfig, Population};
use cldbs_core::plant::{build_plant, PlantConfig, Severity};

fn run(cfg: &NetworkConfig, seed: u64, severity: Severity, amp: f64, secs: f64) -> (Vec<f64>, Vec<f64>) {
    let pc = PlantConfig::network(cfg.clone(), seed, severity);
    let mut plant = build_plant(&pc).unwrap();
    let dt = plant.dt();
    let wf = DbsWaveformSpec::default();
    let per = (1e-3 / dt).round() as usize;
    let n = (secs * 1e3) as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut acc = 0.0;
        for _ in 0..per {
            let t = plant.time();
            acc += plant.step(amp * wf.on_fraction(t, t + dt), dt).unwrap();
        }
        out.push(acc / per as f64);
    }
    let net = plant.as_network().unwrap();
    let rates = [
        Population::Stn,
        Population::Gpe,
        Population::Gpi,
        Population::Thalamus,
        Population::Cortex,
        Population::Interneuron,
    ]
    .iter()
    .map(|&p| net.spike_count(p) as f64 / (net.config().size(p) as f64 * secs))
    .collect();
    (out, rates)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(2).map_or(10, |s| s.parse().unwrap());
    let secs: f64 = args.get(3).map_or(10.0, |s| s.parse().unwrap());
    let seed: u64 = args.get(4).map_or(7, |s| s.parse().unwrap());
    let mut cfg = match args.get(1).filter(|s| s.as_str() != "-") {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap(),
        None => NetworkConfig::default(),
    };
    let base = NetworkConfig::with_population_size(n);
    cfg.n_stn = base.n_stn;
    cfg.n_gpe = base.n_gpe;
    cfg.n_gpi = base.n_gpi;
    cfg.n_thalamus = base.n_thalamus;
    cfg.n_cortical = base.n_cortical;
    cfg.n_interneuron = base.n_interneuron;

    let cases = [
        ("severe off", Severity::Severe, 0.0),
        ("healthy off", Severity::Healthy, 0.0),
        ("severe 2.5mA", Severity::Severe, 2.5),
    ];
    let start = Instant::now();
    let results: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = cases
            .iter()
            .map(|&(_, sev, amp)| {
                let cfg = &cfg;
                s.spawn(move || run(cfg, seed, sev, amp, secs))
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for ((name, _, _), (lfp, rates)) in cases.iter().zip(&results) {
        let x = TimeSeries::from_samples(lfp.clone(), 1000.0, Unit::Microvolt).unwrap();
        let full = welch_psd(&x, 2.0, 0.5).unwrap();
        let beta = band_power(&full, 13.0, 30.0).unwrap();
        let total = band_power(&full, 1.0, 100.0).unwrap();
        let tail = TimeSeries::from_samples(lfp[lfp.len() / 3..].to_vec(), 1000.0, Unit::Microvolt).unwrap();
        let tail_beta = band_power(&welch_psd(&tail, 2.0, 0.5).unwrap(), 13.0, 30.0).unwrap();
        let peak = full
            .freqs
            .iter()
            .zip(&full.density)
            .filter(|(f, _)| **f >= 1.0 && **f <= 100.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, _)| *f)
            .unwrap();
        println!(
            "{name:>13}: beta frac {:.3} beta {:.3e} tail beta {:.3e} peak {peak} Hz rates {:?}",
            beta / total,
            beta,
            tail_beta,
            rates.iter().map(|r| (r * 10.0).round() / 10.0).collect::<Vec<_>>()
        );
        let edges = [1.0, 5.0, 10.0, 13.0, 20.0, 30.0, 50.0, 100.0];
        let bins: Vec<String> = edges
            .windows(2)
            .map(|w| {
                format!(
                    "{:.0}-{:.0}:{:.2}",
                    w[0],
                    w[1],
                    band_power(&full, w[0], w[1]).unwrap() / total
                )
            })
            .collect();
        println!("{:>15}{}", "", bins.join(" "));
    }
    eprintln!("elapsed {:.1} s", start.elapsed().as_secs_f64());
}
