//! Desired-frequency sweep with a fixed receiver.
//!
//! The receiver (and its pattern) is designed once for the design band; the
//! sweep then moves the desired tone across the band and beyond it, and
//! records how often the desired signal is still recovered.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::exec::Executor;
use crate::pipeline::Receiver;
use crate::rng::{rng_for, stream};
use crate::sigmodel::{Band, SignalSpec, ToneSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "mode", content = "hz", rename_all = "snake_case")
)]
pub enum InterfererMode {
    /// Interferer parked at this frequency for the whole sweep.
    Fixed(f64),
    /// Interferer follows the desired tone at this offset.
    CoSwept(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub design_band: Band,
    pub interferer_bands: Vec<Band>,
    pub sweep_freqs: Vec<f64>,
    pub interferer_mode: Option<InterfererMode>,
    pub desired_amplitude: f64,
    pub interferer_amplitude_ratio: f64,
    pub noise_std: f64,
    pub trials_per_point: usize,
}

/// 5 kHz to 95 kHz in 5 kHz steps.
pub fn default_sweep_freqs() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 5e3).collect()
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            design_band: Band::new(0.0, 20e3),
            interferer_bands: alloc::vec![Band::new(40e3, 50e3)],
            sweep_freqs: default_sweep_freqs(),
            interferer_mode: Some(InterfererMode::Fixed(45e3)),
            desired_amplitude: 1.0,
            interferer_amplitude_ratio: 3.16,
            noise_std: 0.0,
            trials_per_point: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub desired_freq_hz: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_probability: f64,
    pub mean_snr_db: f64,
    pub mean_drop_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, freq: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.desired_freq_hz == freq)
    }
}

impl SweepPlan {
    fn freqs_sorted(&self) -> Vec<f64> {
        let mut f = self.sweep_freqs.clone();
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    fn spec_at(&self, freq: f64, rng: &mut impl Rng) -> SignalSpec {
        let mut spec = SignalSpec {
            tones: alloc::vec![ToneSpec::desired(freq, self.desired_amplitude)
                .with_phase(rng.random_range(0.0..TAU))],
            noise_std: self.noise_std,
            design_band: self.design_band,
            interferer_bands: self.interferer_bands.clone(),
        };
        if let Some(mode) = self.interferer_mode {
            let fi = match mode {
                InterfererMode::Fixed(f) => f,
                InterfererMode::CoSwept(offset) => freq + offset,
            };
            spec.tones.push(
                ToneSpec::interferer(fi, self.desired_amplitude * self.interferer_amplitude_ratio)
                    .with_phase(rng.random_range(0.0..TAU)),
            );
        }
        spec
    }

    pub fn validate(&self, receiver: &Receiver) -> Result<()> {
        if self.sweep_freqs.is_empty() {
            return Err(Error::InvalidSweep("no sweep frequencies".into()));
        }
        if self.trials_per_point < 1 {
            return Err(Error::InvalidSweep("trials_per_point must be >= 1".into()));
        }
        if self.interferer_amplitude_ratio.is_nan() || self.interferer_amplitude_ratio <= 0.0 {
            return Err(Error::InvalidSweep(
                "interferer amplitude ratio must be positive".into(),
            ));
        }
        let grid = receiver.pattern().grid();
        for &f in &self.freqs_sorted() {
            let mut rng = rng_for(0, &[]);
            self.spec_at(f, &mut rng)
                .validate(grid)
                .map_err(|e| Error::InvalidSweep(format!("at {f} Hz: {e}")))?;
        }
        Ok(())
    }
}

pub fn run_sweep<E: Executor>(
    plan: &SweepPlan,
    receiver: &Receiver,
    seed: u64,
    exec: &E,
) -> Result<SweepResult> {
    plan.validate(receiver)?;
    let freqs = plan.freqs_sorted();
    let per = plan.trials_per_point;
    let outcomes = exec
        .map(freqs.len() * per, |job| {
            let (point, trial) = (job / per, job % per);
            let freq = freqs[point];
            let mut rng = rng_for(seed, &[stream::SWEEP, freq.to_bits(), trial as u64]);
            let spec = plan.spec_at(freq, &mut rng);
            receiver.run_with(&spec, &mut rng)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let rows = freqs
        .iter()
        .zip(outcomes.chunks(per))
        .map(|(&freq, chunk)| {
            let successes = chunk.iter().filter(|o| o.success).count();
            let n = chunk.len() as f64;
            SweepRow {
                desired_freq_hz: freq,
                trials: chunk.len(),
                successes,
                success_probability: successes as f64 / n,
                mean_snr_db: chunk.iter().map(|o| o.snr_db).sum::<f64>() / n,
                mean_drop_fraction: chunk.iter().map(|o| o.drop_fraction()).sum::<f64>() / n,
            }
        })
        .collect();
    Ok(SweepResult { rows })
}
