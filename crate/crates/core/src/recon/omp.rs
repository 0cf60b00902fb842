//! Orthogonal matching pursuit with frequency-pair admission.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, BandLabel, Dictionary, ReconResult, SolverWarning};
use crate::sampling::Observation;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OmpSettings {
    /// Upper bound on selected atoms (cosine and sine count separately).
    pub max_atoms: usize,
    /// Stop once `‖r‖ <= residual_tol * ‖y‖`.
    pub residual_tol: f64,
}

impl Default for OmpSettings {
    fn default() -> Self {
        Self {
            max_atoms: 16,
            residual_tol: 1e-9,
        }
    }
}

/// Diagonal of R below this (columns are unit norm) marks a dependent atom.
const RANK_TOL: f64 = 1e-9;

struct Fit {
    coefficients: Vec<f64>,
    residual: DVector<f64>,
}

/// Least squares on the selected columns via Householder QR. Returns the
/// position (within `selected`) of the first dependent column on failure.
fn fit(a: &DMatrix<f64>, y: &DVector<f64>, selected: &[usize]) -> core::result::Result<Fit, usize> {
    let sub = a.select_columns(selected);
    let qr = sub.clone().qr();
    let r = qr.r();
    if let Some(pos) = (0..selected.len()).find(|&j| r[(j, j)].abs() < RANK_TOL) {
        return Err(pos);
    }
    let qty = qr.q().transpose() * y;
    let c = r
        .solve_upper_triangular(&qty)
        .expect("nonsingular triangular factor");
    let residual = y - &sub * &c;
    Ok(Fit {
        coefficients: c.iter().copied().collect(),
        residual,
    })
}

/// Greedy selection by residual correlation, with a full least-squares refit
/// on the selected set after every step. The cosine and sine atoms of the
/// winning frequency enter together.
pub fn omp_solve(
    observation: &Observation,
    dict: &Dictionary,
    settings: &OmpSettings,
) -> Result<ReconResult> {
    check_shapes(observation, dict)?;
    let a = dict.matrix();
    let y = DVector::from_column_slice(&observation.values);
    let y_norm = y.norm();
    let dense_len = dict.grid().len();
    let mut result = ReconResult::empty(dense_len, y_norm);
    if y_norm == 0.0 {
        return Ok(result);
    }

    let cap = settings.max_atoms.min(a.ncols()).min(a.nrows());
    let mut available = alloc::vec![true; a.ncols()];
    let mut selected: Vec<usize> = Vec::new();
    let mut coefficients: Vec<f64> = Vec::new();
    let mut residual = y.clone();
    let mut residual_norm = y_norm;

    while residual_norm > settings.residual_tol * y_norm && selected.len() < cap {
        let corr = a.tr_mul(&residual);
        let best = dict
            .groups()
            .iter()
            .map(|g| {
                let score: f64 = g
                    .iter()
                    .filter(|&&j| available[j])
                    .map(|&j| corr[j] * corr[j])
                    .sum();
                (g, score)
            })
            .filter(|(_, s)| *s > 0.0)
            .fold(None::<(&Vec<usize>, f64)>, |acc, (g, s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((g, s)),
            });
        let Some((group, _)) = best else { break };

        let mut entering: Vec<usize> = group.iter().copied().filter(|&j| available[j]).collect();
        if selected.len() + entering.len() > cap {
            entering.sort_by(|&p, &q| corr[q].abs().total_cmp(&corr[p].abs()));
            entering.truncate(cap - selected.len());
        }
        for &j in &entering {
            available[j] = false;
        }
        selected.extend(&entering);

        loop {
            match fit(a, &y, &selected) {
                Ok(f) => {
                    coefficients = f.coefficients;
                    residual = f.residual;
                    break;
                }
                Err(pos) => {
                    let atom = selected.remove(pos);
                    result.warnings.push(SolverWarning::RankDeficient { atom });
                    if selected.is_empty() {
                        coefficients.clear();
                        residual = y.clone();
                        break;
                    }
                }
            }
        }
        residual_norm = residual.norm();
        result.iterations += 1;
        result.residual_history.push(residual_norm);
    }

    let mut coeffs: Vec<(usize, f64)> = selected
        .iter()
        .copied()
        .zip(coefficients.iter().copied())
        .filter(|(_, c)| *c != 0.0)
        .collect();
    coeffs.sort_by_key(|c| c.0);
    result.reconstructed_desired = dict.synthesize(&coeffs, BandLabel::DesiredBand);
    result.coefficients = coeffs;
    result.residual_norm = residual_norm;
    Ok(result)
}
