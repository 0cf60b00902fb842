//! Time grids, multitone baseband scenarios and their realization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::{rng_for, Fingerprint};
use crate::{Error, Result};

/// Dense simulation grid standing in for continuous time.
///
/// Index `i` maps to `t_i = i / rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    rate: f64,
    duration: f64,
    len: usize,
}

impl TimeGrid {
    pub const DEFAULT_RATE: f64 = 400_000.0;
    pub const DEFAULT_DURATION: f64 = 0.01;
    pub const MIN_LEN: usize = 8;

    pub fn new(rate: f64, duration: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "rate must be positive, got {rate}"
            )));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let len = libm::round(rate * duration);
        if len < Self::MIN_LEN as f64 {
            return Err(Error::InvalidGrid(format!(
                "grid has {len} samples, need at least {}",
                Self::MIN_LEN
            )));
        }
        Ok(Self {
            rate,
            duration,
            len: len as usize,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nyquist(&self) -> f64 {
        self.rate / 2.0
    }

    /// Time of a (possibly negative, for padding) grid offset.
    pub fn time(&self, offset: i64) -> f64 {
        offset as f64 / self.rate
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_RATE, Self::DEFAULT_DURATION).expect("default grid is valid")
    }
}

/// Closed frequency interval `[lo, hi]` in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f <= self.hi
    }

    pub fn overlaps(&self, other: &Band) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn check(&self, nyquist: f64, what: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo < 0.0 || self.lo > self.hi {
            return Err(Error::InvalidSpec(format!(
                "{what} [{}, {}] is not a valid interval",
                self.lo, self.hi
            )));
        }
        if self.hi >= nyquist {
            return Err(Error::InvalidSpec(format!(
                "{what} [{}, {}] reaches the grid Nyquist frequency {nyquist}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ToneRole {
    Desired,
    Interferer,
}

/// One cosine component. `phase = None` draws a fresh uniform phase on every
/// realization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ToneSpec {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: Option<f64>,
    pub role: ToneRole,
}

impl ToneSpec {
    pub fn desired(frequency: f64, amplitude: f64) -> Self {
        Self {
            frequency,
            amplitude,
            phase: None,
            role: ToneRole::Desired,
        }
    }

    pub fn interferer(frequency: f64, amplitude: f64) -> Self {
        Self {
            frequency,
            amplitude,
            phase: None,
            role: ToneRole::Interferer,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = Some(phase);
        self
    }
}

/// A baseband scenario plus the band priors the receiver is allowed to use.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignalSpec {
    pub tones: Vec<ToneSpec>,
    pub noise_std: f64,
    pub design_band: Band,
    pub interferer_bands: Vec<Band>,
}

impl SignalSpec {
    pub fn new(design_band: Band) -> Self {
        Self {
            tones: Vec::new(),
            noise_std: 0.0,
            design_band,
            interferer_bands: Vec::new(),
        }
    }

    pub fn tone(mut self, tone: ToneSpec) -> Self {
        self.tones.push(tone);
        self
    }

    pub fn interferer_band(mut self, band: Band) -> Self {
        self.interferer_bands.push(band);
        self
    }

    pub fn noise(mut self, std: f64) -> Self {
        self.noise_std = std;
        self
    }

    /// Desired tones outside the design band are accepted; the sweep relies
    /// on exactly that.
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        let nyquist = grid.nyquist();
        for (index, tone) in self.tones.iter().enumerate() {
            if !(tone.frequency > 0.0 && tone.frequency < nyquist) {
                return Err(Error::InvalidTone {
                    index,
                    reason: format!("frequency {} Hz outside (0, {nyquist}) Hz", tone.frequency),
                });
            }
            if !(tone.amplitude > 0.0 && tone.amplitude.is_finite()) {
                return Err(Error::InvalidTone {
                    index,
                    reason: format!("amplitude {} must be positive", tone.amplitude),
                });
            }
            if let Some(p) = tone.phase {
                if !p.is_finite() {
                    return Err(Error::InvalidTone {
                        index,
                        reason: format!("phase {p} is not finite"),
                    });
                }
            }
        }
        if !self.tones.iter().any(|t| t.role == ToneRole::Desired) {
            return Err(Error::InvalidSpec("no desired tone".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "noise_std {} must be non-negative",
                self.noise_std
            )));
        }
        self.design_band.check(nyquist, "design band")?;
        for band in &self.interferer_bands {
            band.check(nyquist, "interferer band")?;
            if band.overlaps(&self.design_band) {
                return Err(Error::InvalidSpec(format!(
                    "interferer band [{}, {}] overlaps the design band",
                    band.lo, band.hi
                )));
            }
        }
        Ok(())
    }

    /// Stable hash of the realized-relevant content, used to audit that
    /// paired trials saw the same scenario.
    pub fn fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::default().float(self.noise_std);
        for t in &self.tones {
            fp = fp
                .float(t.frequency)
                .float(t.amplitude)
                .float(t.phase.unwrap_or(f64::NAN))
                .word(t.role as u64);
        }
        fp.finish()
    }
}

/// A realized scenario. All vectors carry `margin` extra samples before and
/// after the grid so that filters can be run in steady state; the plain
/// accessors return the `grid.len()` samples inside the margin.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    grid: TimeGrid,
    margin: usize,
    samples: Vec<f64>,
    desired: Vec<f64>,
    interferer: Vec<f64>,
    noise: Vec<f64>,
}

impl SignalFrame {
    /// Builds a margin-free frame from its components.
    pub fn from_components(
        grid: TimeGrid,
        desired: Vec<f64>,
        interferer: Vec<f64>,
        noise: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if desired.len() != n || interferer.len() != n || noise.len() != n {
            return Err(Error::InvalidSpec(format!(
                "component lengths must all equal the grid length {n}"
            )));
        }
        let samples = sum3(&desired, &interferer, &noise);
        Ok(Self {
            grid,
            margin: 0,
            samples,
            desired,
            interferer,
            noise,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    fn inner<'a>(&self, v: &'a [f64]) -> &'a [f64] {
        &v[self.margin..self.margin + self.grid.len()]
    }

    pub fn samples(&self) -> &[f64] {
        self.inner(&self.samples)
    }

    pub fn desired(&self) -> &[f64] {
        self.inner(&self.desired)
    }

    pub fn interferer(&self) -> &[f64] {
        self.inner(&self.interferer)
    }

    pub fn noise(&self) -> &[f64] {
        self.inner(&self.noise)
    }

    /// Samples including the margins, length `grid.len() + 2 * margin`.
    pub fn padded_samples(&self) -> &[f64] {
        &self.samples
    }
}

fn sum3(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| x + y + z)
        .collect()
}

/// Realizes `spec` on `grid`. Deterministic for a fixed seed.
pub fn realize(spec: &SignalSpec, grid: &TimeGrid, seed: u64) -> Result<SignalFrame> {
    realize_padded(spec, grid, 0, seed)
}

/// Like [`realize`], with `margin` additional samples on both sides of the
/// grid (at negative times and past the end).
pub fn realize_padded(
    spec: &SignalSpec,
    grid: &TimeGrid,
    margin: usize,
    seed: u64,
) -> Result<SignalFrame> {
    spec.validate(grid)?;
    let total = grid.len() + 2 * margin;
    let mut rng = rng_for(seed, &[]);

    let mut desired = vec![0.0; total];
    let mut interferer = vec![0.0; total];
    for tone in &spec.tones {
        let phase = match tone.phase {
            Some(p) => p,
            None => rng.random_range(0.0..TAU),
        };
        let target = match tone.role {
            ToneRole::Desired => &mut desired,
            ToneRole::Interferer => &mut interferer,
        };
        let w = TAU * tone.frequency;
        for (i, out) in target.iter_mut().enumerate() {
            let t = grid.time(i as i64 - margin as i64);
            *out += tone.amplitude * libm::cos(w * t + phase);
        }
    }

    let noise: Vec<f64> = if spec.noise_std > 0.0 {
        (0..total)
            .map(|_| spec.noise_std * rng.sample::<f64, _>(StandardNormal))
            .collect()
    } else {
        vec![0.0; total]
    };

    let samples = sum3(&desired, &interferer, &noise);
    Ok(SignalFrame {
        grid: *grid,
        margin,
        samples,
        desired,
        interferer,
        noise,
    })
}

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

pub fn rms(x: &[f64]) -> f64 {
    libm::sqrt(mean_square(x))
}
