//! Uniformly clocked sub-Nyquist ADC with a keep/drop mask.
//!
//! A [`SamplingPattern`] lives on the ADC clock grid: ADC index `k` reads the
//! dense sample `k * D`. Patterns only ever remove clock ticks; the converter
//! itself is never clocked non-uniformly (except in the `D = 1` mode, where
//! the ADC grid is the dense grid).

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;

use crate::frontend::FrontendOutput;
use crate::rng::rng_for;
use crate::sigmodel::TimeGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingPattern {
    grid: TimeGrid,
    decimation: usize,
    kept: Vec<usize>,
}

impl SamplingPattern {
    /// Validates and wraps an explicit kept set.
    pub fn new(grid: TimeGrid, decimation: usize, kept: Vec<usize>) -> Result<Self> {
        if decimation < 1 || decimation > grid.len() {
            return Err(Error::InvalidPattern(format!(
                "ADC decimation {decimation} outside [1, {}]",
                grid.len()
            )));
        }
        let slots = grid.len() / decimation;
        if kept.is_empty() {
            return Err(Error::InvalidPattern("pattern keeps no samples".into()));
        }
        if let Some(w) = kept.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPattern(format!(
                "indices not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = kept.last() {
            if last >= slots {
                return Err(Error::InvalidPattern(format!(
                    "index {last} outside the {slots} ADC slots"
                )));
            }
        }
        Ok(Self {
            grid,
            decimation,
            kept,
        })
    }

    /// Every ADC clock tick kept.
    pub fn uniform(grid: TimeGrid, decimation: usize) -> Result<Self> {
        if decimation < 1 || decimation > grid.len() {
            return Err(Error::InvalidPattern(format!(
                "ADC decimation {decimation} outside [1, {}]",
                grid.len()
            )));
        }
        let slots = grid.len() / decimation;
        Self::new(grid, decimation, (0..slots).collect())
    }

    /// Uniformly random `keep_count`-subset of the ADC ticks with all
    /// consecutive kept indices at least `min_gap` apart.
    ///
    /// Sampling is exact rather than by rejection: choosing `keep_count`
    /// positions among `slots - (keep_count - 1) * (min_gap - 1)` and
    /// spreading the i-th one by `i * (min_gap - 1)` is a bijection onto the
    /// valid sets.
    pub fn random(
        grid: TimeGrid,
        decimation: usize,
        keep_count: usize,
        min_gap: usize,
        seed: u64,
    ) -> Result<Self> {
        if decimation < 1 || decimation > grid.len() {
            return Err(Error::InvalidPattern(format!(
                "ADC decimation {decimation} outside [1, {}]",
                grid.len()
            )));
        }
        if min_gap < 1 {
            return Err(Error::InvalidPattern("min_gap must be >= 1".into()));
        }
        let slots = grid.len() / decimation;
        let infeasible = Error::InfeasiblePattern {
            keep_count,
            min_gap,
            slots,
        };
        if keep_count == 0 {
            return Err(infeasible);
        }
        let span = (keep_count - 1)
            .checked_mul(min_gap - 1)
            .and_then(|s| s.checked_add(keep_count))
            .ok_or(infeasible.clone())?;
        if span > slots {
            return Err(infeasible);
        }
        let free = slots - (keep_count - 1) * (min_gap - 1);
        let mut rng = rng_for(seed, &[]);
        let mut picks = index::sample(&mut rng, free, keep_count).into_vec();
        picks.sort_unstable();
        let kept = picks
            .into_iter()
            .enumerate()
            .map(|(i, p)| p + i * (min_gap - 1))
            .collect();
        Self::new(grid, decimation, kept)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn decimation(&self) -> usize {
        self.decimation
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// Number of ADC clock ticks in the frame.
    pub fn slots(&self) -> usize {
        self.grid.len() / self.decimation
    }

    pub fn adc_clock(&self) -> f64 {
        self.grid.rate() / self.decimation as f64
    }

    pub fn average_rate(&self) -> f64 {
        self.kept.len() as f64 / self.grid.duration()
    }

    pub fn dense_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept.iter().map(move |k| k * self.decimation)
    }

    pub fn dense_index_vec(&self) -> Vec<usize> {
        self.dense_indices().collect()
    }

    fn without(&self, removed: &[usize]) -> Vec<usize> {
        // `removed` holds positions into `kept`, sorted
        let mut r = removed.iter().peekable();
        self.kept
            .iter()
            .enumerate()
            .filter(|(pos, _)| {
                if r.peek() == Some(&pos) {
                    r.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, &k)| k)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DropMode {
    KeepAll,
    DropSaturated,
    DropSaturatedCapped,
}

impl DropMode {
    pub const ALL: [DropMode; 3] = [
        DropMode::KeepAll,
        DropMode::DropSaturated,
        DropMode::DropSaturatedCapped,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DropMode::KeepAll => "keep_all",
            DropMode::DropSaturated => "drop_saturated",
            DropMode::DropSaturatedCapped => "drop_saturated_capped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DropPolicy {
    pub mode: DropMode,
    pub max_drop_fraction: f64,
}

impl DropPolicy {
    pub const DEFAULT_MAX_DROP_FRACTION: f64 = 0.05;

    pub fn keep_all() -> Self {
        Self {
            mode: DropMode::KeepAll,
            max_drop_fraction: Self::DEFAULT_MAX_DROP_FRACTION,
        }
    }

    pub fn drop_saturated() -> Self {
        Self {
            mode: DropMode::DropSaturated,
            max_drop_fraction: Self::DEFAULT_MAX_DROP_FRACTION,
        }
    }

    pub fn capped(max_drop_fraction: f64) -> Self {
        Self {
            mode: DropMode::DropSaturatedCapped,
            max_drop_fraction,
        }
    }

    pub fn with_mode(self, mode: DropMode) -> Self {
        Self { mode, ..self }
    }
}

impl Default for DropPolicy {
    fn default() -> Self {
        Self::keep_all()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DropRecord {
    /// ADC clock index that was removed.
    pub adc_index: usize,
    pub overshoot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    /// Pattern after drops; `values[j]` was read at `pattern.kept()[j]`.
    pub pattern: SamplingPattern,
    pub dropped: Vec<DropRecord>,
    /// Kept samples that were saturated (dropped or not).
    pub flagged: usize,
    pub requested: usize,
}

impl Observation {
    /// Gather without a frontend: reads `samples` (length `grid.len()`) at
    /// the pattern's instants.
    pub fn direct(samples: &[f64], pattern: SamplingPattern) -> Result<Self> {
        if samples.len() != pattern.grid().len() {
            return Err(Error::InvalidPattern(format!(
                "signal has {} samples, pattern grid {}",
                samples.len(),
                pattern.grid().len()
            )));
        }
        let values = pattern.dense_indices().map(|i| samples[i]).collect();
        let requested = pattern.len();
        Ok(Self {
            values,
            pattern,
            dropped: Vec::new(),
            flagged: 0,
            requested,
        })
    }

    pub fn drop_fraction(&self) -> f64 {
        self.dropped.len() as f64 / self.requested as f64
    }
}

pub fn acquire(
    front: &FrontendOutput,
    pattern: &SamplingPattern,
    policy: &DropPolicy,
) -> Result<Observation> {
    let n = pattern.grid().len();
    if front.samples.len() != n {
        return Err(Error::InvalidPattern(format!(
            "frontend output has {} samples, pattern grid {n}",
            front.samples.len()
        )));
    }
    let d = pattern.decimation();
    // positions into `kept` that are saturated
    let flagged: Vec<usize> = pattern
        .kept()
        .iter()
        .enumerate()
        .filter(|(_, &k)| front.saturation_flags[k * d])
        .map(|(pos, _)| pos)
        .collect();

    let mut removed: Vec<usize> = match policy.mode {
        DropMode::KeepAll => Vec::new(),
        DropMode::DropSaturated => flagged.clone(),
        DropMode::DropSaturatedCapped => {
            let cap = libm::floor(policy.max_drop_fraction * pattern.len() as f64) as usize;
            let mut ranked = flagged.clone();
            let overshoot = |pos: &usize| front.overshoot[pattern.kept()[*pos] * d];
            // largest overshoot first; earlier index breaks ties
            ranked.sort_by(|a, b| overshoot(b).total_cmp(&overshoot(a)).then(a.cmp(b)));
            ranked.truncate(cap);
            ranked
        }
    };
    removed.sort_unstable();

    let dropped: Vec<DropRecord> = removed
        .iter()
        .map(|&pos| {
            let k = pattern.kept()[pos];
            DropRecord {
                adc_index: k,
                overshoot: front.overshoot[k * d],
            }
        })
        .collect();

    let kept = pattern.without(&removed);
    if kept.is_empty() {
        return Err(Error::EmptyAcquisition);
    }
    let effective = SamplingPattern::new(*pattern.grid(), d, kept)?;
    let values = effective
        .dense_indices()
        .map(|i| front.samples[i])
        .collect();
    Ok(Observation {
        values,
        pattern: effective,
        dropped,
        flagged: flagged.len(),
        requested: pattern.len(),
    })
}
