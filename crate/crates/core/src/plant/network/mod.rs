//! Cortico-basal-ganglia network plant.
//!
//! Six populations (STN, GPe, GPi, thalamus, cortical pyramidal cells,
//! cortical interneurons) plus Poisson striatal input to GPe, wired at random
//! with fixed in-degrees. Synapses are conductance-based with exponential
//! decay and a fixed axonal delay. DBS enters as intracellular current into
//! the GPe and into the cortical cells whose axons pass the electrode. The
//! LFP is the distance-weighted sum of STN synaptic currents.

mod neurons;

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use neurons::{Cortical, CorticalParams, Pallidal, Stn, Thalamic, SPIKE_THRESHOLD_MV};

use crate::error::{Error, Result};
use crate::plant::lfp::LfpWeights;
use crate::plant::poisson::striatal_spike_trains;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Stn,
    Gpe,
    Gpi,
    Thalamus,
    Cortex,
    Interneuron,
    Striatum,
}

/// A synaptic pathway between two populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    GpeToStn,
    CortexToStn,
    StriatumToGpe,
    GpeToGpe,
    StnToGpe,
    StnToGpi,
    GpeToGpi,
    GpiToThalamus,
    ThalamusToCortex,
    InterneuronToCortex,
    CortexToInterneuron,
}

impl Projection {
    pub const ALL: [Projection; 11] = [
        Projection::GpeToStn,
        Projection::CortexToStn,
        Projection::StriatumToGpe,
        Projection::GpeToGpe,
        Projection::StnToGpe,
        Projection::StnToGpi,
        Projection::GpeToGpi,
        Projection::GpiToThalamus,
        Projection::ThalamusToCortex,
        Projection::InterneuronToCortex,
        Projection::CortexToInterneuron,
    ];

    pub fn source(self) -> Population {
        use Population::*;
        match self {
            Projection::GpeToStn | Projection::GpeToGpe | Projection::GpeToGpi => Gpe,
            Projection::CortexToStn | Projection::CortexToInterneuron => Cortex,
            Projection::StriatumToGpe => Striatum,
            Projection::StnToGpe | Projection::StnToGpi => Stn,
            Projection::GpiToThalamus => Gpi,
            Projection::ThalamusToCortex => Thalamus,
            Projection::InterneuronToCortex => Interneuron,
        }
    }

    pub fn target(self) -> Population {
        use Population::*;
        match self {
            Projection::GpeToStn | Projection::CortexToStn => Stn,
            Projection::StriatumToGpe | Projection::GpeToGpe | Projection::StnToGpe => Gpe,
            Projection::StnToGpi | Projection::GpeToGpi => Gpi,
            Projection::GpiToThalamus => Thalamus,
            Projection::ThalamusToCortex | Projection::InterneuronToCortex => Cortex,
            Projection::CortexToInterneuron => Interneuron,
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&p| p == self).expect("listed in ALL")
    }

    fn config_name(self) -> &'static str {
        match self {
            Projection::GpeToStn => "stn_from_gpe",
            Projection::CortexToStn => "stn_from_cortex",
            Projection::StriatumToGpe => "gpe_from_striatum",
            Projection::GpeToGpe => "gpe_from_gpe",
            Projection::StnToGpe => "gpe_from_stn",
            Projection::StnToGpi => "gpi_from_stn",
            Projection::GpeToGpi => "gpi_from_gpe",
            Projection::GpiToThalamus => "thalamus_from_gpi",
            Projection::ThalamusToCortex => "cortex_from_thalamus",
            Projection::InterneuronToCortex => "cortex_from_interneuron",
            Projection::CortexToInterneuron => "interneuron_from_cortex",
        }
    }
}

/// Per-target in-degree of every projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InDegrees {
    pub stn_from_gpe: usize,
    pub stn_from_cortex: usize,
    pub gpe_from_striatum: usize,
    pub gpe_from_gpe: usize,
    pub gpe_from_stn: usize,
    pub gpi_from_stn: usize,
    pub gpi_from_gpe: usize,
    pub thalamus_from_gpi: usize,
    pub cortex_from_thalamus: usize,
    pub cortex_from_interneuron: usize,
    pub interneuron_from_cortex: usize,
}

impl Default for InDegrees {
    fn default() -> Self {
        Self {
            stn_from_gpe: 5,
            stn_from_cortex: 5,
            gpe_from_striatum: 1,
            gpe_from_gpe: 1,
            gpe_from_stn: 2,
            gpi_from_stn: 1,
            gpi_from_gpe: 1,
            thalamus_from_gpi: 1,
            cortex_from_thalamus: 1,
            cortex_from_interneuron: 10,
            interneuron_from_cortex: 10,
        }
    }
}

impl InDegrees {
    pub fn get(&self, p: Projection) -> usize {
        match p {
            Projection::GpeToStn => self.stn_from_gpe,
            Projection::CortexToStn => self.stn_from_cortex,
            Projection::StriatumToGpe => self.gpe_from_striatum,
            Projection::GpeToGpe => self.gpe_from_gpe,
            Projection::StnToGpe => self.gpe_from_stn,
            Projection::StnToGpi => self.gpi_from_stn,
            Projection::GpeToGpi => self.gpi_from_gpe,
            Projection::GpiToThalamus => self.thalamus_from_gpi,
            Projection::ThalamusToCortex => self.cortex_from_thalamus,
            Projection::InterneuronToCortex => self.cortex_from_interneuron,
            Projection::CortexToInterneuron => self.interneuron_from_cortex,
        }
    }
}

/// Kinetics of one synaptic pathway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseParams {
    /// Peak conductance per afferent spike, mS/cm².
    pub g: f64,
    /// Reversal potential, mV.
    pub e_rev: f64,
    /// Exponential decay time constant, ms.
    pub tau_ms: f64,
    /// Axonal plus synaptic delay, ms.
    pub delay_ms: f64,
}

const fn syn(g: f64, e_rev: f64, tau_ms: f64, delay_ms: f64) -> SynapseParams {
    SynapseParams {
        g,
        e_rev,
        tau_ms,
        delay_ms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapseTable {
    pub stn_from_gpe: SynapseParams,
    pub stn_from_cortex: SynapseParams,
    pub gpe_from_striatum: SynapseParams,
    pub gpe_from_gpe: SynapseParams,
    pub gpe_from_stn: SynapseParams,
    pub gpi_from_stn: SynapseParams,
    pub gpi_from_gpe: SynapseParams,
    pub thalamus_from_gpi: SynapseParams,
    pub cortex_from_thalamus: SynapseParams,
    pub cortex_from_interneuron: SynapseParams,
    pub interneuron_from_cortex: SynapseParams,
}

impl Default for SynapseTable {
    fn default() -> Self {
        Self {
            stn_from_gpe: syn(0.6, -85.0, 12.0, 7.0),
            stn_from_cortex: syn(0.1, 0.0, 5.0, 5.0),
            gpe_from_striatum: syn(0.5, -85.0, 10.0, 1.0),
            gpe_from_gpe: syn(0.3, -85.0, 8.0, 1.0),
            gpe_from_stn: syn(0.6, 0.0, 4.0, 2.0),
            gpi_from_stn: syn(0.5, 0.0, 4.0, 2.0),
            gpi_from_gpe: syn(0.5, -85.0, 8.0, 3.0),
            thalamus_from_gpi: syn(0.1, -85.0, 8.0, 2.0),
            cortex_from_thalamus: syn(0.1, 0.0, 5.0, 5.0),
            cortex_from_interneuron: syn(0.05, -80.0, 8.0, 1.0),
            interneuron_from_cortex: syn(0.05, 0.0, 5.0, 1.0),
        }
    }
}

impl SynapseTable {
    pub fn get(&self, p: Projection) -> SynapseParams {
        match p {
            Projection::GpeToStn => self.stn_from_gpe,
            Projection::CortexToStn => self.stn_from_cortex,
            Projection::StriatumToGpe => self.gpe_from_striatum,
            Projection::GpeToGpe => self.gpe_from_gpe,
            Projection::StnToGpe => self.gpe_from_stn,
            Projection::StnToGpi => self.gpi_from_stn,
            Projection::GpeToGpi => self.gpi_from_gpe,
            Projection::GpiToThalamus => self.thalamus_from_gpi,
            Projection::ThalamusToCortex => self.cortex_from_thalamus,
            Projection::InterneuronToCortex => self.cortex_from_interneuron,
            Projection::CortexToInterneuron => self.interneuron_from_cortex,
        }
    }
}

/// Intracellular bias current per population, µA/cm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationBias {
    pub stn: f64,
    pub gpe: f64,
    pub gpi: f64,
    pub thalamus: f64,
    pub cortex: f64,
    pub interneuron: f64,
}

impl Default for PopulationBias {
    fn default() -> Self {
        Self {
            stn: 30.0,
            gpe: 2.0,
            gpi: 3.0,
            thalamus: 1.2,
            cortex: 0.8,
            interneuron: 0.0,
        }
    }
}

/// How the DBS current reaches the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbsCoupling {
    /// Intracellular current density per mA of electrode current, µA/cm² per mA.
    pub ua_per_ma: f64,
    /// Fraction of GPe neurons receiving the current.
    pub gpe_fraction: f64,
    /// Fraction of cortical pyramidal cells whose axons are activated.
    pub cortex_fraction: f64,
}

impl Default for DbsCoupling {
    fn default() -> Self {
        Self {
            ua_per_ma: 150.0,
            gpe_fraction: 1.0,
            cortex_fraction: 1.0,
        }
    }
}

/// Electrode geometry folded into LFP weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LfpConfig {
    pub d_min_mm: f64,
    pub d_max_mm: f64,
    /// Calibration gain, µV per (µA/cm² · mm⁻¹), for a population of
    /// [`LFP_REFERENCE_STN`] cells. Other sizes are rescaled by
    /// `LFP_REFERENCE_STN / n_stn` so the LFP amplitude does not depend on size.
    pub gain: f64,
}

impl Default for LfpConfig {
    fn default() -> Self {
        Self {
            d_min_mm: 0.5,
            d_max_mm: 2.0,
            gain: 8e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_stn: usize,
    pub n_gpe: usize,
    pub n_gpi: usize,
    pub n_thalamus: usize,
    pub n_interneuron: usize,
    pub n_cortical: usize,
    pub in_degrees: InDegrees,
    pub striatal_rate_hz: f64,
    /// Multiplier on the STN bias current; `None` takes it from the severity.
    pub stn_bias_scale: Option<f64>,
    pub bias: PopulationBias,
    /// Each neuron's bias is scaled by a uniform factor in `1 ± heterogeneity`.
    pub bias_heterogeneity: f64,
    /// Std of an independent Gaussian current per neuron, µA/cm², redrawn
    /// every `noise_hold_ms`.
    pub noise_std: f64,
    pub noise_hold_ms: f64,
    pub synapses: SynapseTable,
    pub dbs: DbsCoupling,
    pub lfp: LfpConfig,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::with_population_size(100)
    }
}

impl NetworkConfig {
    /// Every population holds `n` neurons; in-degrees and kinetics keep their
    /// defaults, so each neuron sees the same afferent drive at any size.
    pub fn with_population_size(n: usize) -> Self {
        Self {
            n_stn: n,
            n_gpe: n,
            n_gpi: n,
            n_thalamus: n,
            n_interneuron: n,
            n_cortical: n,
            in_degrees: InDegrees::default(),
            striatal_rate_hz: 3.0,
            stn_bias_scale: None,
            bias: PopulationBias::default(),
            bias_heterogeneity: 0.1,
            noise_std: 0.0,
            noise_hold_ms: 1.0,
            synapses: SynapseTable::default(),
            dbs: DbsCoupling::default(),
            lfp: LfpConfig::default(),
        }
    }

    pub fn size(&self, p: Population) -> usize {
        match p {
            Population::Stn => self.n_stn,
            Population::Gpe => self.n_gpe,
            Population::Gpi => self.n_gpi,
            Population::Thalamus => self.n_thalamus,
            Population::Cortex => self.n_cortical,
            Population::Interneuron => self.n_interneuron,
            // One striatal source per GPe neuron.
            Population::Striatum => self.n_gpe,
        }
    }

    pub fn total_neurons(&self) -> usize {
        self.n_stn + self.n_gpe + self.n_gpi + self.n_thalamus + self.n_interneuron + self.n_cortical
    }

    /// Checks every constraint; messages are qualified with `path`.
    pub fn validate(&self, path: &str) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::Config(format!("{path}.{field}: {msg}")));
        for p in Projection::ALL {
            let k = self.in_degrees.get(p);
            let n_src = self.size(p.source());
            let available = if p.source() == p.target() {
                n_src.saturating_sub(1)
            } else {
                n_src
            };
            if k > available {
                return fail(
                    &format!("in_degrees.{}", p.config_name()),
                    format!(
                        "in-degree {k} exceeds the {available} available {:?} sources",
                        p.source()
                    ),
                );
            }
            let s = self.synapses.get(p);
            if !(s.g >= 0.0 && s.tau_ms > 0.0 && s.delay_ms >= 0.0 && s.e_rev.is_finite()) {
                return fail(
                    &format!("synapses.{}", p.config_name()),
                    "need g >= 0, tau_ms > 0, delay_ms >= 0".into(),
                );
            }
        }
        if !(self.striatal_rate_hz >= 0.0 && self.striatal_rate_hz.is_finite()) {
            return fail(
                "striatal_rate_hz",
                format!("must be >= 0, got {}", self.striatal_rate_hz),
            );
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return fail("noise_std", format!("must be >= 0, got {}", self.noise_std));
        }
        if !(self.noise_hold_ms > 0.0 && self.noise_hold_ms.is_finite()) {
            return fail("noise_hold_ms", format!("must be > 0, got {}", self.noise_hold_ms));
        }
        if !(0.0..1.0).contains(&self.bias_heterogeneity) {
            return fail("bias_heterogeneity", "must lie in [0, 1)".into());
        }
        if let Some(s) = self.stn_bias_scale {
            if !(s.is_finite() && s >= 0.0) {
                return fail("stn_bias_scale", format!("must be >= 0, got {s}"));
            }
        }
        if !(0.0..=1.0).contains(&self.dbs.gpe_fraction) || !(0.0..=1.0).contains(&self.dbs.cortex_fraction) {
            return fail("dbs", "stimulated fractions must lie in [0, 1]".into());
        }
        if !(self.lfp.d_min_mm > 0.0 && self.lfp.d_min_mm <= self.lfp.d_max_mm) {
            return fail("lfp", "need 0 < d_min_mm <= d_max_mm".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Pathway {
    params: SynapseParams,
    decay: f64,
    delay_steps: u64,
    /// Afferent source indices for each target neuron.
    afferents: Vec<Vec<usize>>,
    /// Activation of each source's synapse (spike-triggered, decaying).
    activation: Vec<f64>,
    /// Spikes in flight: (delivery step, source).
    in_flight: VecDeque<(u64, usize)>,
}

impl Pathway {
    fn drive(&self, target: usize) -> f64 {
        self.afferents[target].iter().map(|&j| self.activation[j]).sum()
    }

    fn current(&self, target: usize, v: f64) -> f64 {
        self.params.g * self.drive(target) * (v - self.params.e_rev)
    }
}

const STRIATAL_BLOCK_S: f64 = 1.0;

/// STN population size the LFP gain is calibrated for.
pub const LFP_REFERENCE_STN: f64 = 100.0;

/// The network plant. Internal time unit is ms.
#[derive(Debug, Clone)]
pub struct NetworkPlant {
    config: NetworkConfig,
    dt_ms: f64,
    step: u64,
    rng: ChaCha8Rng,
    stn: Vec<Stn>,
    gpe: Vec<Pallidal>,
    gpi: Vec<Pallidal>,
    thalamus: Vec<Thalamic>,
    cortex: Vec<Cortical>,
    interneuron: Vec<Cortical>,
    bias: [Vec<f64>; 6],
    /// Bias plus noise for the current step.
    drive: [Vec<f64>; 6],
    noise: [Vec<f64>; 6],
    noise_hold_steps: u64,
    pathways: Vec<Pathway>,
    gpe_stimulated: Vec<bool>,
    cortex_stimulated: Vec<bool>,
    lfp: LfpWeights,
    stn_currents: Vec<f64>,
    striatal_steps: Vec<Vec<u64>>,
    striatal_next: Vec<usize>,
    striatal_block_end: u64,
    spike_counts: [u64; 6],
}

const POPS: [Population; 6] = [
    Population::Stn,
    Population::Gpe,
    Population::Gpi,
    Population::Thalamus,
    Population::Cortex,
    Population::Interneuron,
];

fn pop_index(p: Population) -> usize {
    POPS.iter().position(|&q| q == p).expect("striatum has no neurons")
}

impl NetworkPlant {
    /// Wires the network. `dt` is in seconds; `stn_bias_scale` comes from the
    /// severity unless the config overrides it.
    pub fn new(config: &NetworkConfig, dt: f64, stn_bias_scale: f64, mut rng: ChaCha8Rng) -> Result<Self> {
        config.validate("plant.network")?;
        let dt_ms = dt * 1e3;

        let mut pathways = Vec::with_capacity(Projection::ALL.len());
        for p in Projection::ALL {
            let n_src = config.size(p.source());
            let n_dst = config.size(p.target());
            let k = config.in_degrees.get(p);
            let same = p.source() == p.target();
            let afferents = (0..n_dst)
                .map(|i| {
                    if same {
                        index::sample(&mut rng, n_src - 1, k)
                            .into_iter()
                            .map(|j| if j >= i { j + 1 } else { j })
                            .collect()
                    } else {
                        index::sample(&mut rng, n_src, k).into_vec()
                    }
                })
                .collect();
            let params = config.synapses.get(p);
            pathways.push(Pathway {
                params,
                decay: (-dt_ms / params.tau_ms).exp(),
                delay_steps: ((params.delay_ms / dt_ms).round() as u64).max(1),
                afferents,
                activation: vec![0.0; n_src],
                in_flight: VecDeque::new(),
            });
        }

        let b = &config.bias;
        let base = [
            b.stn * stn_bias_scale,
            b.gpe,
            b.gpi,
            b.thalamus,
            b.cortex,
            b.interneuron,
        ];
        let het = config.bias_heterogeneity;
        let bias = std::array::from_fn(|k| {
            (0..config.size(POPS[k]))
                .map(|_| base[k] * (1.0 + het * rng.random_range(-1.0..=1.0)))
                .collect()
        });

        let mut jitter = |v: f64| v + rng.random_range(-5.0..=5.0);
        let stn = (0..config.n_stn)
            .map(|_| {
                let mut c = Stn::at_rest();
                c.v = jitter(-62.0);
                c
            })
            .collect();
        let gpe = (0..config.n_gpe)
            .map(|_| {
                let mut c = Pallidal::at_rest();
                c.v = jitter(-65.0);
                c
            })
            .collect();
        let gpi = (0..config.n_gpi)
            .map(|_| {
                let mut c = Pallidal::at_rest();
                c.v = jitter(-65.0);
                c
            })
            .collect();
        let thalamus = (0..config.n_thalamus)
            .map(|_| {
                let mut c = Thalamic::at_rest();
                c.v = jitter(-65.0);
                c
            })
            .collect();
        let cortex = (0..config.n_cortical)
            .map(|_| {
                let mut c = Cortical::at_rest();
                c.v = jitter(-70.0);
                c
            })
            .collect();
        let interneuron = (0..config.n_interneuron)
            .map(|_| {
                let mut c = Cortical::at_rest();
                c.v = jitter(-70.0);
                c
            })
            .collect();

        let gpe_stimulated = (0..config.n_gpe)
            .map(|_| rng.random::<f64>() < config.dbs.gpe_fraction)
            .collect();
        let cortex_stimulated = (0..config.n_cortical)
            .map(|_| rng.random::<f64>() < config.dbs.cortex_fraction)
            .collect();
        let lfp = LfpWeights::random(
            config.n_stn,
            config.lfp.d_min_mm,
            config.lfp.d_max_mm,
            config.lfp.gain * LFP_REFERENCE_STN / config.n_stn.max(1) as f64,
            &mut rng,
        );

        Ok(Self {
            dt_ms,
            step: 0,
            stn,
            gpe,
            gpi,
            thalamus,
            cortex,
            interneuron,
            drive: bias.clone(),
            noise: std::array::from_fn(|k| vec![0.0; config.size(POPS[k])]),
            noise_hold_steps: ((config.noise_hold_ms / dt_ms).round() as u64).max(1),
            bias,
            pathways,
            gpe_stimulated,
            cortex_stimulated,
            lfp,
            stn_currents: vec![0.0; config.n_stn],
            striatal_steps: vec![Vec::new(); config.size(Population::Striatum)],
            striatal_next: vec![0; config.size(Population::Striatum)],
            striatal_block_end: 0,
            spike_counts: [0; 6],
            config: config.clone(),
            rng,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Afferent source indices of `target` along `projection`.
    pub fn afferents(&self, projection: Projection, target: usize) -> &[usize] {
        &self.pathways[projection.index()].afferents[target]
    }

    pub fn lfp_weights(&self) -> &LfpWeights {
        &self.lfp
    }

    /// Spikes emitted so far by `population`.
    pub fn spike_count(&self, population: Population) -> u64 {
        self.spike_counts[pop_index(population)]
    }

    fn refill_striatum(&mut self) -> Result<()> {
        let block_steps = (STRIATAL_BLOCK_S * 1e3 / self.dt_ms).round() as u64;
        let start = self.striatal_block_end;
        let trains = striatal_spike_trains(
            self.striatal_steps.len(),
            self.config.striatal_rate_hz,
            STRIATAL_BLOCK_S,
            &mut self.rng,
        )?;
        for (dst, train) in self.striatal_steps.iter_mut().zip(trains) {
            dst.clear();
            dst.extend(train.iter().map(|t| start + (t * 1e3 / self.dt_ms) as u64));
        }
        self.striatal_next.iter_mut().for_each(|k| *k = 0);
        self.striatal_block_end = start + block_steps;
        Ok(())
    }

    /// Advances one step with electrode current `i_dbs` mA; returns the LFP in µV.
    pub fn advance(&mut self, i_dbs: f64) -> Result<f64> {
        let now = self.step;
        if now >= self.striatal_block_end {
            self.refill_striatum()?;
        }

        for pw in &mut self.pathways {
            while let Some(&(at, src)) = pw.in_flight.front() {
                if at > now {
                    break;
                }
                pw.activation[src] += 1.0;
                pw.in_flight.pop_front();
            }
        }
        let striatal = &mut self.pathways[Projection::StriatumToGpe.index()];
        for (src, train) in self.striatal_steps.iter().enumerate() {
            let next = &mut self.striatal_next[src];
            while *next < train.len() && train[*next] <= now {
                striatal.activation[src] += 1.0;
                *next += 1;
            }
        }

        if self.config.noise_std > 0.0 && now.is_multiple_of(self.noise_hold_steps) {
            let sd = self.config.noise_std;
            for x in self.noise.iter_mut().flatten() {
                *x = sd * self.rng.sample::<f64, _>(StandardNormal);
            }
        }
        for (k, noise) in self.noise.iter().enumerate() {
            for (dst, (b, z)) in self.drive[k].iter_mut().zip(self.bias[k].iter().zip(noise)) {
                *dst = b + z;
            }
        }

        let dt = self.dt_ms;
        let i_stim = self.config.dbs.ua_per_ma * i_dbs;
        let pw = &self.pathways;
        let syn = |p: Projection, i: usize, v: f64| pw[p.index()].current(i, v);
        let mut spiked: [Vec<usize>; 6] = Default::default();

        let mut lfp = 0.0;
        for (i, n) in self.stn.iter_mut().enumerate() {
            let i_syn = syn(Projection::GpeToStn, i, n.v) + syn(Projection::CortexToStn, i, n.v);
            self.stn_currents[i] = i_syn;
            let before = n.v;
            n.step(self.drive[0][i] - i_syn, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[0].push(i);
            }
        }
        lfp += self.lfp.lfp_from_synaptic_currents(&self.stn_currents);

        for (i, n) in self.gpe.iter_mut().enumerate() {
            let i_syn = syn(Projection::StriatumToGpe, i, n.v)
                + syn(Projection::GpeToGpe, i, n.v)
                + syn(Projection::StnToGpe, i, n.v);
            let stim = if self.gpe_stimulated[i] { i_stim } else { 0.0 };
            let before = n.v;
            n.step(self.drive[1][i] - i_syn + stim, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[1].push(i);
            }
        }
        for (i, n) in self.gpi.iter_mut().enumerate() {
            let i_syn = syn(Projection::StnToGpi, i, n.v) + syn(Projection::GpeToGpi, i, n.v);
            let before = n.v;
            n.step(self.drive[2][i] - i_syn, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[2].push(i);
            }
        }
        for (i, n) in self.thalamus.iter_mut().enumerate() {
            let i_syn = syn(Projection::GpiToThalamus, i, n.v);
            let before = n.v;
            n.step(self.drive[3][i] - i_syn, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[3].push(i);
            }
        }
        for (i, n) in self.cortex.iter_mut().enumerate() {
            let i_syn = syn(Projection::ThalamusToCortex, i, n.v) + syn(Projection::InterneuronToCortex, i, n.v);
            let stim = if self.cortex_stimulated[i] { i_stim } else { 0.0 };
            let before = n.v;
            n.step(&CorticalParams::REGULAR_SPIKING, self.drive[4][i] - i_syn + stim, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[4].push(i);
            }
        }
        for (i, n) in self.interneuron.iter_mut().enumerate() {
            let i_syn = syn(Projection::CortexToInterneuron, i, n.v);
            let before = n.v;
            n.step(&CorticalParams::FAST_SPIKING, self.drive[5][i] - i_syn, dt);
            if before < SPIKE_THRESHOLD_MV && n.v >= SPIKE_THRESHOLD_MV {
                spiked[5].push(i);
            }
        }

        for pw in &mut self.pathways {
            pw.activation.iter_mut().for_each(|s| *s *= pw.decay);
        }
        for (k, &pop) in POPS.iter().enumerate() {
            self.spike_counts[k] += spiked[k].len() as u64;
            for p in Projection::ALL {
                if p.source() != pop {
                    continue;
                }
                let pw = &mut self.pathways[p.index()];
                for &src in &spiked[k] {
                    pw.in_flight.push_back((now + pw.delay_steps, src));
                }
            }
        }

        self.step += 1;
        if !lfp.is_finite() {
            return Err(Error::Argument(format!(
                "network state diverged at step {now}; reduce dt"
            )));
        }
        Ok(lfp)
    }
}
