//! Runs the four-controller comparison on the surrogate plant and prints it.
//!
//! Usage: `compare_surrogate [config.json] [n_seeds]`

use cldbs_core::config::ExperimentConfig;
use cldbs_core::experiment::compare;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let cfg = match args.get(1).filter(|s| s.as_str() != "-") {
        Some(p) => ExperimentConfig::from_file(p.as_ref())?,
        None => ExperimentConfig::default(),
    };
    let n: u64 = args.get(2).map_or(Ok(5), |s| s.parse())?;
    let seeds: Vec<u64> = (1..=n).collect();
    let start = std::time::Instant::now();
    let table = compare(&cfg, &seeds)?;
    println!("seed controller    mse_pct power_pct eff_std  mean_arv");
    for r in table.per_seed.iter().chain(&table.summary) {
        println!(
            "{:>4} {:<12} {:>7.1} {:>9.1} {:>7.3} {:>8.4}",
            r.seed.map_or("mean".into(), |s| s.to_string()),
            r.controller,
            r.mse_pct,
            r.power_pct,
            r.efficiency_std.unwrap_or(f64::NAN),
            r.mean_arv_uv
        );
    }
    eprintln!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
