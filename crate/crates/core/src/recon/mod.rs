//! Band-restricted sparse reconstruction.
//!
//! The dictionary only contains frequencies the receiver knows may be
//! occupied (the design band and the declared interferer bands). Solvers fit
//! the observation with as few atoms as possible; the desired signal is then
//! resynthesized from the design-band atoms alone, on the full dense grid.

mod dictionary;
mod irls;
mod omp;

use alloc::vec::Vec;

pub use dictionary::{build_dictionary, Atom, AtomKind, BandLabel, Dictionary};
pub use irls::{irls_bp_solve, IrlsSettings};
pub use omp::{omp_solve, OmpSettings};

use crate::sampling::Observation;
use crate::sigmodel::SignalFrame;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SolverWarning {
    /// The atom made the selected set rank deficient and was discarded.
    RankDeficient {
        atom: usize,
    },
    NotConverged {
        iterations: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconResult {
    /// Nonzero coefficients in the normalized-atom basis, by atom index.
    pub coefficients: Vec<(usize, f64)>,
    /// Desired-band synthesis on the dense grid, in post-AGC units.
    pub reconstructed_desired: Vec<f64>,
    pub residual_norm: f64,
    /// `None` until [`assess`] has run. `+inf` for an exact match.
    pub desired_snr_db: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    /// Residual norm after each iteration, starting with `‖y‖`.
    pub residual_history: Vec<f64>,
    pub warnings: Vec<SolverWarning>,
}

impl ReconResult {
    pub(crate) fn empty(dense_len: usize, residual_norm: f64) -> Self {
        Self {
            coefficients: Vec::new(),
            reconstructed_desired: alloc::vec![0.0; dense_len],
            residual_norm,
            desired_snr_db: None,
            success: false,
            iterations: 0,
            residual_history: alloc::vec![residual_norm],
            warnings: Vec::new(),
        }
    }

    pub fn converged(&self) -> bool {
        !self
            .warnings
            .iter()
            .any(|w| matches!(w, SolverWarning::NotConverged { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Solver {
    Omp(OmpSettings),
    Irls(IrlsSettings),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverSettings {
    pub solver: Solver,
    /// Dictionary frequency resolution, Hz.
    pub delta_f: f64,
    pub success_threshold_db: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            solver: Solver::Omp(OmpSettings::default()),
            delta_f: 1e3,
            success_threshold_db: 40.0,
        }
    }
}

impl SolverSettings {
    pub fn irls() -> Self {
        Self {
            solver: Solver::Irls(IrlsSettings::default()),
            ..Self::default()
        }
    }
}

pub fn solve(observation: &Observation, dict: &Dictionary, solver: &Solver) -> Result<ReconResult> {
    match solver {
        Solver::Omp(s) => omp_solve(observation, dict, s),
        Solver::Irls(s) => irls_bp_solve(observation, dict, s),
    }
}

pub(crate) fn check_shapes(observation: &Observation, dict: &Dictionary) -> Result<()> {
    if observation.values.is_empty() {
        return Err(Error::Solver("empty observation".into()));
    }
    if observation.values.len() != dict.rows() {
        return Err(Error::Solver(alloc::format!(
            "observation has {} values, dictionary {} rows",
            observation.values.len(),
            dict.rows()
        )));
    }
    Ok(())
}

/// `10 log10(‖d‖² / ‖d − d̂‖²)`.
pub fn snr_db(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::ZeroDesiredEnergy);
    }
    let error: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(d, e)| (d - e) * (d - e))
        .sum();
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(signal / error))
}

/// Scores the desired-band reconstruction against the frame's desired-only
/// component, after undoing the AGC gain.
pub fn assess(
    mut result: ReconResult,
    frame: &SignalFrame,
    applied_gain: f64,
    success_threshold_db: f64,
) -> Result<ReconResult> {
    let estimate: Vec<f64> = result
        .reconstructed_desired
        .iter()
        .map(|v| v / applied_gain)
        .collect();
    let snr = snr_db(frame.desired(), &estimate)?;
    result.desired_snr_db = Some(snr);
    result.success = snr >= success_threshold_db;
    Ok(result)
}
