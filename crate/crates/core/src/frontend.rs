//! The relaxed analog chain between down-conversion and the ADC: a loose
//! lowpass, a block AGC, hard saturation at the converter input and an
//! optional uniform quantizer.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::sigmodel::{rms, SignalFrame, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrontendConfig {
    pub filter_cutoff: f64,
    /// Half-length of the FIR; the filter has `2 * filter_order + 1` taps.
    pub filter_order: usize,
    pub agc_target_rms: f64,
    pub clip_level: f64,
    pub quantizer_bits: Option<u32>,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            filter_cutoff: 20e3,
            filter_order: 8,
            agc_target_rms: 0.25,
            clip_level: 1.0,
            quantizer_bits: None,
        }
    }
}

impl FrontendConfig {
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if !(self.filter_cutoff > 0.0 && self.filter_cutoff < grid.nyquist()) {
            return Err(Error::InvalidFrontend(format!(
                "filter_cutoff {} outside (0, {})",
                self.filter_cutoff,
                grid.nyquist()
            )));
        }
        if self.filter_order < 1 {
            return Err(Error::InvalidFrontend("filter_order must be >= 1".into()));
        }
        if !(self.agc_target_rms > 0.0 && self.agc_target_rms.is_finite()) {
            return Err(Error::InvalidFrontend(
                "agc_target_rms must be positive".into(),
            ));
        }
        if !(self.clip_level > 0.0 && self.clip_level.is_finite()) {
            return Err(Error::InvalidFrontend("clip_level must be positive".into()));
        }
        if let Some(bits) = self.quantizer_bits {
            if !(4..=16).contains(&bits) {
                return Err(Error::InvalidFrontend(format!(
                    "quantizer_bits {bits} outside [4, 16]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrontendOutput {
    pub samples: Vec<f64>,
    pub saturation_flags: Vec<bool>,
    /// `|g * x_i| - clip_level` for flagged samples, zero elsewhere.
    pub overshoot: Vec<f64>,
    pub applied_gain: f64,
}

impl FrontendOutput {
    pub fn flagged_count(&self) -> usize {
        self.saturation_flags.iter().filter(|&&f| f).count()
    }
}

/// Hamming-windowed sinc lowpass with `2 * order + 1` taps, normalized to
/// unit DC gain.
pub fn design_lowpass(cutoff: f64, rate: f64, order: usize) -> Vec<f64> {
    let len = 2 * order + 1;
    let fc = cutoff / rate;
    let mut taps: Vec<f64> = (0..len)
        .map(|n| {
            let x = n as f64 - order as f64;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                libm::sin(TAU * fc * x) / (PI * x)
            };
            let window = 0.54 - 0.46 * libm::cos(TAU * n as f64 / (len - 1) as f64);
            sinc * window
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= dc;
    }
    taps
}

/// Zero-phase application of a symmetric FIR: output `i` is centered on input
/// `i`; samples outside the input are taken as zero.
fn filter_centered(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let order = taps.len() / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(order);
            let hi = (i + order).min(n - 1);
            (lo..=hi).map(|j| taps[j + order - i] * x[j]).sum()
        })
        .collect()
}

pub fn lowpass(samples: &[f64], grid: &TimeGrid, config: &FrontendConfig) -> Result<Vec<f64>> {
    config.validate(grid)?;
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let taps = design_lowpass(config.filter_cutoff, grid.rate(), config.filter_order);
    Ok(filter_centered(samples, &taps))
}

/// Fixed gain followed by hard clipping at `±clip_level`.
pub fn clip_with_gain(samples: &[f64], gain: f64, clip_level: f64) -> FrontendOutput {
    let mut out = Vec::with_capacity(samples.len());
    let mut flags = Vec::with_capacity(samples.len());
    let mut overshoot = Vec::with_capacity(samples.len());
    for &x in samples {
        let v = gain * x;
        let saturated = v.abs() >= clip_level;
        out.push(v.clamp(-clip_level, clip_level));
        flags.push(saturated);
        overshoot.push(if saturated { v.abs() - clip_level } else { 0.0 });
    }
    FrontendOutput {
        samples: out,
        saturation_flags: flags,
        overshoot,
        applied_gain: gain,
    }
}

/// Block AGC: one gain for the whole frame, `agc_target_rms / rms(samples)`,
/// or 1 for a silent frame.
pub fn agc_clip(samples: &[f64], config: &FrontendConfig) -> FrontendOutput {
    let level = rms(samples);
    let gain = if level > 0.0 {
        config.agc_target_rms / level
    } else {
        1.0
    };
    clip_with_gain(samples, gain, config.clip_level)
}

/// Midrise uniform quantizer with `2^bits` levels over `±clip_level`.
pub fn quantize(samples: &[f64], config: &FrontendConfig) -> Vec<f64> {
    let Some(bits) = config.quantizer_bits else {
        return samples.to_vec();
    };
    let levels = 1i64 << bits;
    let step = 2.0 * config.clip_level / levels as f64;
    let (lo, hi) = (-(levels / 2), levels / 2 - 1);
    samples
        .iter()
        .map(|&x| {
            let idx = (libm::floor(x / step) as i64).clamp(lo, hi);
            (idx as f64 + 0.5) * step
        })
        .collect()
}

/// A configured frontend bound to a grid.
#[derive(Debug, Clone)]
pub struct Frontend {
    config: FrontendConfig,
    rate: f64,
    taps: Vec<f64>,
}

impl Frontend {
    pub fn new(config: FrontendConfig, grid: &TimeGrid) -> Result<Self> {
        config.validate(grid)?;
        Ok(Self {
            config,
            rate: grid.rate(),
            taps: design_lowpass(config.filter_cutoff, grid.rate(), config.filter_order),
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.config
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Margin a frame needs for the filter to be in steady state over the
    /// whole grid.
    pub fn margin(&self) -> usize {
        self.config.filter_order
    }

    /// Real (zero-phase) amplitude response at `freq` Hz.
    pub fn response(&self, freq: f64) -> f64 {
        let order = self.config.filter_order as f64;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, h)| h * libm::cos(TAU * freq * (n as f64 - order) / self.rate))
            .sum()
    }

    /// Filter, AGC, clip and quantize a frame. Output has `grid.len()`
    /// samples; the frame margin is consumed by the filter.
    pub fn process(&self, frame: &SignalFrame) -> FrontendOutput {
        let m = frame.margin();
        let n = frame.grid().len();
        let filtered = filter_centered(frame.padded_samples(), &self.taps);
        let mut out = agc_clip(&filtered[m..m + n], &self.config);
        if self.config.quantizer_bits.is_some() {
            out.samples = quantize(&out.samples, &self.config);
        }
        out
    }
}
