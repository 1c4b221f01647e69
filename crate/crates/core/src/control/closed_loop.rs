use serde::{Deserialize, Serialize};

use crate::control::{Controller, DbsWaveformSpec};
use crate::dsp::{BetaChain, ChainConfig, TimeSeries, Unit};
use crate::error::{ensure_arg, Error, Result};
use crate::plant::{DriveKind, Plant};

/// Shortest run accepted by [`run_closed_loop`], s.
pub const MIN_RUN_DURATION_S: f64 = 5.0;

/// Provenance carried with a trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub config_digest: String,
    pub controller: String,
    pub f_center_hz: f64,
}

/// Aligned traces of one run, all at the chain sample rate.
///
/// `dbs_current` holds the RMS of the instantaneous pulse current over each
/// sample interval, so `z · dbs_current²` averages to the delivered power.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub raw_lfp: TimeSeries,
    pub beta_lfp: TimeSeries,
    pub beta_arv: TimeSeries,
    pub amplitude: TimeSeries,
    pub dbs_current: TimeSeries,
    pub meta: RunMeta,
}

impl SimulationTrace {
    /// Assembles a trace, checking that every series shares length and rate.
    pub fn new(
        raw_lfp: TimeSeries,
        beta_lfp: TimeSeries,
        beta_arv: TimeSeries,
        amplitude: TimeSeries,
        dbs_current: TimeSeries,
        meta: RunMeta,
    ) -> Result<Self> {
        let trace = Self {
            raw_lfp,
            beta_lfp,
            beta_arv,
            amplitude,
            dbs_current,
            meta,
        };
        trace.check_aligned()?;
        Ok(trace)
    }

    pub fn series(&self) -> [&TimeSeries; 5] {
        [
            &self.raw_lfp,
            &self.beta_lfp,
            &self.beta_arv,
            &self.amplitude,
            &self.dbs_current,
        ]
    }

    pub fn check_aligned(&self) -> Result<()> {
        let len = self.raw_lfp.len();
        let fs = self.raw_lfp.fs();
        for s in self.series() {
            ensure_arg!(
                s.len() == len && crate::dsp::same_rate(s.fs(), fs),
                "trace series are misaligned ({} samples at {} Hz vs {} at {} Hz)",
                s.len(),
                s.fs(),
                len,
                fs
            );
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.raw_lfp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_lfp.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.raw_lfp.fs()
    }
}

fn ratio_as_count(ratio: f64, what: &str) -> Result<usize> {
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-6 * n {
        return Err(Error::Config(format!(
            "{what} must be a whole multiple (got ratio {ratio})"
        )));
    }
    Ok(n as usize)
}

/// Runs `plant` under `controller` for `duration` seconds.
///
/// The plant steps at its own `dt`. Each chain sample averages the LFP over
/// `dt · k` (k = plant rate / chain rate) and feeds the streaming band-pass,
/// rectifier, and ARV. The controller updates every control period from the
/// latest ARV, and its amplitude sets the pulse train applied to the plant.
/// Amplitude changes therefore fall on multiples of the control period.
pub fn run_closed_loop(
    plant: &mut Plant,
    controller: &mut Controller,
    duration: f64,
    chain: &ChainConfig,
    f_center: f64,
    waveform: &DbsWaveformSpec,
) -> Result<SimulationTrace> {
    ensure_arg!(
        duration >= MIN_RUN_DURATION_S,
        "run duration {duration} s is shorter than the {MIN_RUN_DURATION_S} s minimum"
    );
    waveform.validate("controller.waveform")?;
    let fs = chain.sample_rate_hz;
    let dt = plant.dt();
    let per_sample = ratio_as_count(1.0 / (dt * fs), "the chain sample period / plant dt")?;
    let per_control = ratio_as_count(controller.period() * fs, "the control period / chain sample period")?;
    let mut beta_chain = BetaChain::new(chain, f_center)?;

    let n = (duration * fs).round() as usize;
    let mut raw = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut arv = Vec::with_capacity(n);
    let mut amp = Vec::with_capacity(n);
    let mut current = Vec::with_capacity(n);
    let kind = plant.drive_kind();
    let sample_period = per_sample as f64 * dt;
    let mut amplitude = controller.amplitude();

    for m in 0..n {
        let block_start = plant.time();
        let mut acc = 0.0;
        for _ in 0..per_sample {
            let drive = match kind {
                DriveKind::Amplitude => amplitude,
                DriveKind::PulseTrain => {
                    let t = plant.time();
                    amplitude * waveform.on_fraction(t, t + dt)
                }
            };
            acc += plant.step(drive, dt)?;
        }
        let lfp = acc / per_sample as f64;
        let out = beta_chain.push(lfp);
        raw.push(lfp);
        beta.push(out.beta);
        arv.push(out.arv);
        amp.push(amplitude);
        current.push(amplitude * waveform.on_fraction(block_start, block_start + sample_period).sqrt());
        if (m + 1) % per_control == 0 {
            amplitude = controller.step(out.arv)?;
        }
    }

    let series = |xs: Vec<f64>, unit| TimeSeries::from_samples(xs, fs, unit);
    SimulationTrace::new(
        series(raw, Unit::Microvolt)?,
        series(beta, Unit::Microvolt)?,
        series(arv, Unit::Microvolt)?,
        series(amp, Unit::Milliampere)?,
        series(current, Unit::Milliampere)?,
        RunMeta {
            controller: controller.kind().id().to_string(),
            f_center_hz: f_center,
            ..RunMeta::default()
        },
    )
}
