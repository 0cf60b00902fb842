//! Pattern testing: Monte Carlo scoring of sampling patterns against a band
//! constellation, and seeded random search for the best pattern and drop
//! policy.
//!
//! Trial `t` of candidate `c` always draws its scenario from the stream
//! `(seed, TRIAL, c, t)`, independently of the drop policy and of the
//! executor. Policies evaluated for the same candidate therefore see the
//! same scenarios, and serial and parallel runs agree bit for bit.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::TAU;

use rand::Rng;

use crate::exec::Executor;
use crate::frontend::FrontendConfig;
use crate::pipeline::{Receiver, TrialOutcome};
use crate::recon::SolverSettings;
use crate::rng::{rng_for, stream, TrialRng};
use crate::sampling::{DropMode, DropPolicy, SamplingPattern};
use crate::sigmodel::{Band, SignalSpec, TimeGrid, ToneSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Objective {
    #[default]
    MaxSuccessRate,
    MaxWorstSnr,
}

/// What a pattern is designed for, and how hard to search.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignBrief {
    pub grid: TimeGrid,
    pub design_band: Band,
    pub interferer_bands: Vec<Band>,
    /// Spacing of the ensemble's frequency grid, Hz.
    pub freq_step: f64,
    pub desired_amplitude: f64,
    pub interferer_amplitude: f64,
    pub noise_std: f64,
    pub adc_decimation: usize,
    /// Inclusive range the candidate keep count is drawn from.
    pub keep_count_range: (usize, usize),
    /// Inclusive range the candidate minimum gap is drawn from.
    pub min_gap_range: (usize, usize),
    pub max_drop_fraction: f64,
    pub candidate_count: usize,
    pub trials_per_candidate: usize,
    pub objective: Objective,
}

impl Default for DesignBrief {
    fn default() -> Self {
        Self {
            grid: TimeGrid::default(),
            design_band: Band::new(0.0, 20e3),
            interferer_bands: alloc::vec![Band::new(40e3, 50e3)],
            freq_step: 1e3,
            desired_amplitude: 1.0,
            interferer_amplitude: 3.16,
            noise_std: 0.0,
            adc_decimation: 5,
            keep_count_range: (4, 28),
            min_gap_range: (1, 8),
            max_drop_fraction: DropPolicy::DEFAULT_MAX_DROP_FRACTION,
            candidate_count: 50,
            trials_per_candidate: 50,
            objective: Objective::MaxSuccessRate,
        }
    }
}

fn grid_points(band: &Band, step: f64) -> impl Iterator<Item = f64> + '_ {
    let lo = libm::ceil(band.lo / step) as i64;
    let hi = libm::floor(band.hi / step + 1e-9) as i64;
    (lo..=hi).map(move |k| k as f64 * step).filter(|&f| f > 0.0)
}

impl DesignBrief {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidBrief(m.into()));
        if self.candidate_count < 1 {
            return fail("candidate_count must be >= 1");
        }
        if self.trials_per_candidate < 1 {
            return fail("trials_per_candidate must be >= 1");
        }
        if self.freq_step.is_nan() || self.freq_step <= 0.0 {
            return fail("freq_step must be positive");
        }
        if !(self.desired_amplitude > 0.0 && self.interferer_amplitude > 0.0) {
            return fail("amplitudes must be positive");
        }
        let (klo, khi) = self.keep_count_range;
        if klo < 1 || klo > khi {
            return fail("keep_count_range must be a nonempty range starting at >= 1");
        }
        let (glo, ghi) = self.min_gap_range;
        if glo < 1 || glo > ghi {
            return fail("min_gap_range must be a nonempty range starting at >= 1");
        }
        if self.adc_decimation < 1 || self.adc_decimation > self.grid.len() {
            return fail("adc_decimation outside [1, grid length]");
        }
        if klo > self.grid.len() / self.adc_decimation {
            return fail("keep_count_range exceeds the ADC slot count");
        }
        if !(0.0..1.0).contains(&self.max_drop_fraction) {
            return fail("max_drop_fraction must be in [0, 1)");
        }
        if self.desired_freqs().is_empty() {
            return fail("design band holds no ensemble frequency");
        }
        self.spec_template().validate(&self.grid)
    }

    /// Ensemble grid of the desired tone (0 Hz excluded).
    pub fn desired_freqs(&self) -> Vec<f64> {
        grid_points(&self.design_band, self.freq_step).collect()
    }

    pub fn interferer_freqs(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self
            .interferer_bands
            .iter()
            .flat_map(|b| grid_points(b, self.freq_step))
            .collect();
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    fn spec_template(&self) -> SignalSpec {
        let f = self
            .desired_freqs()
            .first()
            .copied()
            .unwrap_or(self.freq_step);
        let mut spec = SignalSpec {
            tones: alloc::vec![ToneSpec::desired(f, self.desired_amplitude)],
            noise_std: self.noise_std,
            design_band: self.design_band,
            interferer_bands: self.interferer_bands.clone(),
        };
        if let Some(&fi) = self.interferer_freqs().first() {
            spec.tones
                .push(ToneSpec::interferer(fi, self.interferer_amplitude));
        }
        spec
    }

    /// One scenario from the ensemble: desired tone uniform on the design
    /// grid, interferer uniform on the interferer grid, uniform phases.
    pub fn draw_spec(&self, rng: &mut TrialRng) -> SignalSpec {
        let desired = self.desired_freqs();
        let interferers = self.interferer_freqs();
        let fd = desired[rng.random_range(0..desired.len())];
        let mut spec = SignalSpec {
            tones: alloc::vec![ToneSpec::desired(fd, self.desired_amplitude)
                .with_phase(rng.random_range(0.0..TAU))],
            noise_std: self.noise_std,
            design_band: self.design_band,
            interferer_bands: self.interferer_bands.clone(),
        };
        if !interferers.is_empty() {
            let fi = interferers[rng.random_range(0..interferers.len())];
            spec.tones.push(
                ToneSpec::interferer(fi, self.interferer_amplitude)
                    .with_phase(rng.random_range(0.0..TAU)),
            );
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternScore {
    pub candidate_id: usize,
    pub pattern: SamplingPattern,
    /// Minimum-gap knob the pattern was drawn with (or its actual smallest
    /// gap, for externally supplied patterns).
    pub min_gap: usize,
    pub policy: DropPolicy,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_snr_db: f64,
    pub worst_snr_db: f64,
    pub mean_drop_fraction: f64,
}

impl PatternScore {
    pub fn keep_count(&self) -> usize {
        self.pattern.len()
    }

    fn aggregate(
        candidate_id: usize,
        pattern: &SamplingPattern,
        min_gap: usize,
        policy: DropPolicy,
        outcomes: &[TrialOutcome],
    ) -> Self {
        let trials = outcomes.len();
        let successes = outcomes.iter().filter(|o| o.success).count();
        let n = trials as f64;
        Self {
            candidate_id,
            pattern: pattern.clone(),
            min_gap,
            policy,
            trials,
            successes,
            success_rate: successes as f64 / n,
            mean_snr_db: outcomes.iter().map(|o| o.snr_db).sum::<f64>() / n,
            worst_snr_db: outcomes
                .iter()
                .map(|o| o.snr_db)
                .fold(f64::INFINITY, f64::min),
            mean_drop_fraction: outcomes.iter().map(|o| o.drop_fraction()).sum::<f64>() / n,
        }
    }

    /// `Greater` when `self` is the better pick under `objective`, including
    /// the tie-break chain (worst-case SNR, fewer kept samples, then the
    /// lexicographically smaller kept set).
    pub fn rank(&self, other: &Self, objective: Objective) -> Ordering {
        let primary = match objective {
            Objective::MaxSuccessRate => self.success_rate.total_cmp(&other.success_rate),
            Objective::MaxWorstSnr => self
                .worst_snr_db
                .total_cmp(&other.worst_snr_db)
                .then(self.success_rate.total_cmp(&other.success_rate)),
        };
        primary
            .then(self.worst_snr_db.total_cmp(&other.worst_snr_db))
            .then(other.keep_count().cmp(&self.keep_count()))
            .then(other.pattern.kept().cmp(self.pattern.kept()))
    }
}

fn smallest_gap(pattern: &SamplingPattern) -> usize {
    pattern
        .kept()
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or(1)
}

fn trial_outcomes<E: Executor>(
    receiver: &Receiver,
    brief: &DesignBrief,
    seed: u64,
    candidate_id: usize,
    exec: &E,
) -> Result<Vec<TrialOutcome>> {
    exec.map(brief.trials_per_candidate, |t| {
        let mut rng = rng_for(seed, &[stream::TRIAL, candidate_id as u64, t as u64]);
        let spec = brief.draw_spec(&mut rng);
        receiver.run_with(&spec, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Scores one pattern/policy pair; returns the per-trial outcomes as well.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_pattern_detailed<E: Executor>(
    pattern: &SamplingPattern,
    policy: DropPolicy,
    brief: &DesignBrief,
    frontend: &FrontendConfig,
    solver: &SolverSettings,
    seed: u64,
    exec: &E,
) -> Result<(PatternScore, Vec<TrialOutcome>)> {
    brief.validate()?;
    let receiver = Receiver::new(
        *frontend,
        pattern.clone(),
        policy,
        brief.design_band,
        brief.interferer_bands.clone(),
        *solver,
    )?;
    let outcomes = trial_outcomes(&receiver, brief, seed, 0, exec)?;
    let score = PatternScore::aggregate(0, pattern, smallest_gap(pattern), policy, &outcomes);
    Ok((score, outcomes))
}

pub fn evaluate_pattern<E: Executor>(
    pattern: &SamplingPattern,
    policy: DropPolicy,
    brief: &DesignBrief,
    frontend: &FrontendConfig,
    solver: &SolverSettings,
    seed: u64,
    exec: &E,
) -> Result<PatternScore> {
    evaluate_pattern_detailed(pattern, policy, brief, frontend, solver, seed, exec).map(|r| r.0)
}

/// A candidate pattern and the knobs it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub keep_count: usize,
    pub min_gap: usize,
    pub pattern: SamplingPattern,
}

/// Draws candidate `id`. The minimum gap is lowered until the draw is
/// feasible for the chosen keep count.
pub fn draw_candidate(brief: &DesignBrief, seed: u64, id: usize) -> Result<Candidate> {
    let mut rng = rng_for(seed, &[stream::PATTERN, id as u64]);
    let slots = brief.grid.len() / brief.adc_decimation;
    let (klo, khi) = brief.keep_count_range;
    let keep_count = rng.random_range(klo..=khi.min(slots));
    let (glo, ghi) = brief.min_gap_range;
    let mut min_gap = rng.random_range(glo..=ghi);
    let pattern_seed: u64 = rng.random();
    while (keep_count - 1) * (min_gap - 1) + keep_count > slots && min_gap > 1 {
        min_gap -= 1;
    }
    let pattern = SamplingPattern::random(
        brief.grid,
        brief.adc_decimation,
        keep_count,
        min_gap,
        pattern_seed,
    )?;
    Ok(Candidate {
        id,
        keep_count,
        min_gap,
        pattern,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub pattern: SamplingPattern,
    pub policy: DropPolicy,
    pub score: PatternScore,
    /// Every candidate × policy score, candidate-major in policy order
    /// `keep_all, drop_saturated, drop_saturated_capped`.
    pub leaderboard: Vec<PatternScore>,
}

/// Picks the best entry of a leaderboard under `objective`; earlier entries
/// win exact ties.
pub fn best_of(leaderboard: &[PatternScore], objective: Objective) -> Option<&PatternScore> {
    leaderboard.iter().fold(None, |best, s| match best {
        Some(b) if b.rank(s, objective) != Ordering::Less => Some(b),
        _ => Some(s),
    })
}

pub fn select_pattern<E: Executor>(
    brief: &DesignBrief,
    frontend: &FrontendConfig,
    solver: &SolverSettings,
    seed: u64,
    exec: &E,
) -> Result<Selection> {
    brief.validate()?;
    let candidates: Vec<Candidate> = (0..brief.candidate_count)
        .map(|id| draw_candidate(brief, seed, id))
        .collect::<Result<_>>()?;

    let policies: Vec<DropPolicy> = DropMode::ALL
        .iter()
        .map(|&mode| DropPolicy {
            mode,
            max_drop_fraction: brief.max_drop_fraction,
        })
        .collect();
    let jobs = candidates.len() * policies.len();
    let leaderboard: Vec<PatternScore> = exec
        .map(jobs, |job| {
            let cand = &candidates[job / policies.len()];
            let policy = policies[job % policies.len()];
            let receiver = Receiver::new(
                *frontend,
                cand.pattern.clone(),
                policy,
                brief.design_band,
                brief.interferer_bands.clone(),
                *solver,
            )?;
            let outcomes = trial_outcomes(&receiver, brief, seed, cand.id, &crate::exec::Serial)?;
            Ok(PatternScore::aggregate(
                cand.id,
                &cand.pattern,
                cand.min_gap,
                policy,
                &outcomes,
            ))
        })
        .into_iter()
        .collect::<Result<_>>()?;

    if leaderboard.iter().all(|s| s.success_rate == 0.0) {
        return Err(Error::InfeasibleBrief);
    }
    let best = best_of(&leaderboard, brief.objective)
        .expect("nonempty leaderboard")
        .clone();
    Ok(Selection {
        pattern: best.pattern.clone(),
        policy: best.policy,
        score: best,
        leaderboard,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub mode: DropMode,
    pub score: PatternScore,
    /// Scenario fingerprint of every trial, in trial order.
    pub fingerprints: Vec<u64>,
    pub outcomes: Vec<TrialOutcome>,
}

/// The same pattern under every drop policy, on a common scenario stream.
pub fn keep_vs_drop_study<E: Executor>(
    pattern: &SamplingPattern,
    brief: &DesignBrief,
    frontend: &FrontendConfig,
    solver: &SolverSettings,
    seed: u64,
    exec: &E,
) -> Result<Vec<StudyRow>> {
    DropMode::ALL
        .iter()
        .map(|&mode| {
            let policy = DropPolicy {
                mode,
                max_drop_fraction: brief.max_drop_fraction,
            };
            let (score, outcomes) =
                evaluate_pattern_detailed(pattern, policy, brief, frontend, solver, seed, exec)?;
            Ok(StudyRow {
                mode,
                score,
                fingerprints: outcomes.iter().map(|o| o.spec_fingerprint).collect(),
                outcomes,
            })
        })
        .collect()
}
