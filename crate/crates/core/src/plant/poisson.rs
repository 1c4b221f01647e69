use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{ensure_arg, Result};

/// Independent homogeneous Poisson spike trains on `[0, duration)`.
///
/// Spike times within each train are strictly increasing.
pub fn striatal_spike_trains<R: Rng + ?Sized>(
    n: usize,
    rate: f64,
    duration: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    ensure_arg!(
        rate.is_finite() && rate >= 0.0,
        "spike rate must be non-negative, got {rate}"
    );
    ensure_arg!(
        duration.is_finite() && duration >= 0.0,
        "duration must be non-negative, got {duration}"
    );
    if rate == 0.0 || duration == 0.0 {
        return Ok(vec![Vec::new(); n]);
    }
    let isi = Exp::new(rate).expect("rate is positive and finite");
    Ok((0..n)
        .map(|_| {
            let mut train = Vec::with_capacity((rate * duration * 1.2) as usize + 4);
            let mut t = isi.sample(rng);
            while t < duration {
                // Exponential draws can underflow to zero; keep times strictly increasing.
                if train.last().is_none_or(|&last| t > last) {
                    train.push(t);
                }
                t += isi.sample(rng);
            }
            train
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn count_matches_poisson_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trains = striatal_spike_trains(1, 3.0, 100.0, &mut rng).unwrap();
        let n = trains[0].len() as f64;
        assert!((n - 300.0).abs() <= 52.0, "{n} spikes");
        assert!(trains[0].windows(2).all(|w| w[0] < w[1]));
        assert!(trains[0].iter().all(|&t| (0.0..100.0).contains(&t)));
    }

    #[test]
    fn empty_interval_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = striatal_spike_trains(4, 3.0, 0.0, &mut rng).unwrap();
        assert_eq!(empty.len(), 4);
        assert!(empty.iter().all(Vec::is_empty));

        let a = striatal_spike_trains(5, 3.0, 20.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = striatal_spike_trains(5, 3.0, 20.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_arguments_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(striatal_spike_trains(1, -1.0, 1.0, &mut rng).is_err());
        assert!(striatal_spike_trains(1, 1.0, -1.0, &mut rng).is_err());
    }
}
