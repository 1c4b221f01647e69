use rand::Rng;

/// Fixed distance weights mapping STN synaptic currents to an LFP sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LfpWeights {
    weights: Vec<f64>,
}

impl LfpWeights {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    /// `gain / d_j` with `d_j` uniform in `[d_min, d_max]` mm.
    pub fn random<R: Rng + ?Sized>(n: usize, d_min: f64, d_max: f64, gain: f64, rng: &mut R) -> Self {
        Self::new((0..n).map(|_| gain / rng.random_range(d_min..=d_max)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_j w_j · I_j`. Extra inputs beyond the weight count are ignored;
    /// an empty input gives 0.
    pub fn lfp_from_synaptic_currents(&self, currents: &[f64]) -> f64 {
        self.weights.iter().zip(currents).map(|(w, i)| w * i).sum()
    }
}
