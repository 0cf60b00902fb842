//! Basis pursuit by iteratively reweighted least squares.
//!
//! Each iteration solves the weighted ridge problem
//!
//! ```text
//! min_c  Σ c_j² / w_j  +  (1/μ) ‖A c − y‖²,     w_j = sqrt(c_j² + ε²)
//! ```
//!
//! whose fixed point for ε → 0 is the ℓ1 minimizer of the penalized basis
//! pursuit problem. `μ` is kept a tiny fraction of `trace(A W Aᵀ) / m`, so
//! noiseless data is matched to well below 1e-6 relative residual. `ε`
//! starts at the largest coefficient and shrinks tenfold per iteration down
//! to `epsilon_floor * max|c|`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, BandLabel, Dictionary, ReconResult, SolverWarning};
use crate::sampling::Observation;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IrlsSettings {
    /// Lower bound of the smoothing ε, relative to the largest coefficient.
    pub epsilon_floor: f64,
    pub max_iters: usize,
    /// Data-fidelity penalty μ relative to the mean diagonal of `A W Aᵀ`.
    pub penalty: f64,
}

impl Default for IrlsSettings {
    fn default() -> Self {
        Self {
            epsilon_floor: 1e-8,
            max_iters: 1000,
            penalty: 1e-12,
        }
    }
}

/// Coefficients smaller than this fraction of the largest are zeroed before
/// synthesis.
pub const THRESHOLD: f64 = 1e-4;
const EPSILON_DECAY: f64 = 0.1;
const STEP_TOL: f64 = 1e-12;

fn spd_solve(k: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    match k.clone().cholesky() {
        Some(ch) => Some(ch.solve(rhs)),
        None => k.lu().solve(rhs),
    }
}

/// One weighted solve; picks the m×m or n×n normal system, whichever is
/// smaller.
fn weighted_solve(
    a: &DMatrix<f64>,
    gram: Option<&DMatrix<f64>>,
    aty: Option<&DVector<f64>>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    penalty: f64,
) -> Option<DVector<f64>> {
    let (m, n) = a.shape();
    let mu = penalty * w.sum() / m as f64;
    if m <= n {
        // c = W Aᵀ (A W Aᵀ + μ I)⁻¹ y
        let mut aw = a.clone();
        for (mut col, wj) in aw.column_iter_mut().zip(w.iter()) {
            col *= *wj;
        }
        let mut k = &aw * a.transpose();
        for i in 0..m {
            k[(i, i)] += mu;
        }
        let z = spd_solve(k, y)?;
        Some(aw.tr_mul(&z))
    } else {
        // c = (AᵀA + μ W⁻¹)⁻¹ Aᵀ y
        let mut k = gram.expect("gram for tall systems").clone();
        for j in 0..n {
            k[(j, j)] += mu / w[j];
        }
        spd_solve(k, aty.expect("Aᵀy for tall systems"))
    }
}

pub fn irls_bp_solve(
    observation: &Observation,
    dict: &Dictionary,
    settings: &IrlsSettings,
) -> Result<ReconResult> {
    check_shapes(observation, dict)?;
    let a = dict.matrix();
    let y = DVector::from_column_slice(&observation.values);
    let y_norm = y.norm();
    let mut result = ReconResult::empty(dict.grid().len(), y_norm);
    if y_norm == 0.0 {
        return Ok(result);
    }

    let (m, n) = a.shape();
    let (gram, aty) = if m > n {
        (Some(a.tr_mul(a)), Some(a.tr_mul(&y)))
    } else {
        (None, None)
    };
    let solve =
        |w: &DVector<f64>| weighted_solve(a, gram.as_ref(), aty.as_ref(), &y, w, settings.penalty);

    let Some(mut c) = solve(&DVector::from_element(n, 1.0)) else {
        return Err(crate::Error::Solver(
            "initial least-norm solve failed".into(),
        ));
    };
    let mut epsilon = c.amax();
    let mut converged = false;
    for _ in 0..settings.max_iters {
        let scale = c.amax();
        if scale == 0.0 {
            converged = true;
            break;
        }
        epsilon = (epsilon * EPSILON_DECAY).max(settings.epsilon_floor * scale);
        let w = c.map(|v| libm::sqrt(v * v + epsilon * epsilon));
        let Some(next) = solve(&w) else { break };
        let step = (&next - &c).norm();
        c = next;
        result.iterations += 1;
        result.residual_history.push((&y - a * &c).norm());
        if step <= STEP_TOL * c.norm() && epsilon <= settings.epsilon_floor * scale * (1.0 + 1e-12)
        {
            converged = true;
            break;
        }
    }
    if !converged {
        result.warnings.push(SolverWarning::NotConverged {
            iterations: result.iterations,
        });
    }

    let cut = THRESHOLD * c.amax();
    let coeffs: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= cut && **v != 0.0)
        .map(|(j, &v)| (j, v))
        .collect();
    result.residual_norm = (&y - a * &c).norm();
    result.reconstructed_desired = dict.synthesize(&coeffs, BandLabel::DesiredBand);
    result.coefficients = coeffs;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SamplingPattern;
    use crate::sigmodel::{Band, TimeGrid};

    fn dict_for(kept: Vec<usize>) -> (Dictionary, SamplingPattern) {
        let g = TimeGrid::default();
        let p = SamplingPattern::new(g, 5, kept).unwrap();
        let d = Dictionary::build(
            Band::new(0.0, 20e3),
            &[Band::new(40e3, 50e3)],
            &g,
            &p.dense_index_vec(),
            1e3,
        )
        .unwrap();
        (d, p)
    }

    #[test]
    fn single_atom() {
        let (d, p) = dict_for((0..40).map(|k| k * 19 + 3).collect());
        let j = d.groups()[d.group_of(12e3).unwrap()][0];
        let values: Vec<f64> = d.matrix().column(j).iter().copied().collect();
        let obs = Observation {
            values,
            ..Observation::direct(&alloc::vec![0.0; 4000], p).unwrap()
        };
        let r = irls_bp_solve(&obs, &d, &IrlsSettings::default()).unwrap();
        let (top, c) = r
            .coefficients
            .iter()
            .copied()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        assert_eq!(top, j);
        assert!((c - 1.0).abs() < 1e-3, "coefficient {c}");
        assert!(r.converged());
    }

    #[test]
    fn zero_observation() {
        let (d, p) = dict_for((0..40).map(|k| k * 19).collect());
        let obs = Observation::direct(&alloc::vec![0.0; 4000], p).unwrap();
        let r = irls_bp_solve(&obs, &d, &IrlsSettings::default()).unwrap();
        assert!(r.coefficients.is_empty());
        assert!(r.reconstructed_desired.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tall_system_path() {
        // full uniform clock: 800 rows against 62 atoms
        let (d, p) = dict_for((0..800).collect());
        let j = d.groups()[d.group_of(5e3).unwrap()][1];
        let values: Vec<f64> = d.matrix().column(j).iter().map(|v| 2.0 * v).collect();
        let obs = Observation {
            values,
            ..Observation::direct(&alloc::vec![0.0; 4000], p).unwrap()
        };
        let r = irls_bp_solve(&obs, &d, &IrlsSettings::default()).unwrap();
        assert_eq!(r.coefficients.len(), 1);
        assert!((r.coefficients[0].1 - 2.0).abs() < 1e-6);
        assert!(r.residual_norm < 1e-6 * 2.0);
    }
}
