use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::sigmodel::{Band, SignalSpec, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AtomKind {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BandLabel {
    DesiredBand,
    InterfererBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    pub freq: f64,
    pub kind: AtomKind,
    pub label: BandLabel,
    /// Norm of the raw cosine/sine column before normalization.
    pub norm: f64,
    /// Known linear gain the analog chain applies at `freq`; synthesis
    /// divides it out.
    pub gain: f64,
}

impl Atom {
    fn eval(&self, t: f64) -> f64 {
        match self.kind {
            AtomKind::Cos => libm::cos(TAU * self.freq * t),
            AtomKind::Sin => libm::sin(TAU * self.freq * t),
        }
    }
}

/// Cosine/sine atoms on the band-restricted frequency grid, evaluated at the
/// observation instants and normalized to unit column norm.
///
/// Columns that vanish at the instants (the 0 Hz sine, or a sine at half
/// the ADC clock on a uniform clock) carry no information and are left out.
#[derive(Debug, Clone)]
pub struct Dictionary {
    grid: TimeGrid,
    instants: Vec<usize>,
    atom_freqs: Vec<f64>,
    atoms: Vec<Atom>,
    /// Atom indices per entry of `atom_freqs`.
    groups: Vec<Vec<usize>>,
    matrix: DMatrix<f64>,
}

const ZERO_COLUMN: f64 = 1e-8;

fn band_steps(band: &Band, delta_f: f64) -> Result<(i64, i64)> {
    let lo = band.lo / delta_f;
    let hi = band.hi / delta_f;
    let (klo, khi) = (libm::round(lo), libm::round(hi));
    if (lo - klo).abs() > 1e-9 * lo.abs().max(1.0) || (hi - khi).abs() > 1e-9 * hi.abs().max(1.0) {
        return Err(Error::InvalidDictionary(format!(
            "resolution {delta_f} Hz does not divide band edges [{}, {}]",
            band.lo, band.hi
        )));
    }
    Ok((klo as i64, khi as i64))
}

impl Dictionary {
    pub fn build(
        design_band: Band,
        interferer_bands: &[Band],
        grid: &TimeGrid,
        instants: &[usize],
        delta_f: f64,
    ) -> Result<Self> {
        if !(delta_f > 0.0 && delta_f.is_finite()) {
            return Err(Error::InvalidDictionary(format!(
                "frequency resolution must be positive, got {delta_f}"
            )));
        }
        if instants.is_empty() {
            return Err(Error::InvalidDictionary("no observation instants".into()));
        }

        let mut steps: Vec<(i64, BandLabel)> = Vec::new();
        let (lo, hi) = band_steps(&design_band, delta_f)?;
        steps.extend((lo..=hi).map(|k| (k, BandLabel::DesiredBand)));
        for band in interferer_bands {
            let (lo, hi) = band_steps(band, delta_f)?;
            steps.extend((lo..=hi).map(|k| (k, BandLabel::InterfererBand)));
        }
        steps.sort_by_key(|s| s.0);
        steps.dedup_by_key(|s| s.0);
        if steps.is_empty() {
            return Err(Error::InvalidDictionary("band grid is empty".into()));
        }

        let rate = grid.rate();
        let times: Vec<f64> = instants.iter().map(|&i| i as f64 / rate).collect();
        let m = times.len();
        let mut atom_freqs = Vec::new();
        let mut atoms = Vec::new();
        let mut groups = Vec::new();
        let mut columns: Vec<f64> = Vec::new();

        for (k, label) in steps {
            let freq = k as f64 * delta_f;
            let mut group = Vec::new();
            for kind in [AtomKind::Cos, AtomKind::Sin] {
                let mut atom = Atom {
                    freq,
                    kind,
                    label,
                    norm: 0.0,
                    gain: 1.0,
                };
                let col: Vec<f64> = times.iter().map(|&t| atom.eval(t)).collect();
                let norm = libm::sqrt(col.iter().map(|v| v * v).sum::<f64>());
                if norm <= ZERO_COLUMN * libm::sqrt(m as f64) {
                    continue;
                }
                atom.norm = norm;
                group.push(atoms.len());
                atoms.push(atom);
                columns.extend(col.iter().map(|v| v / norm));
            }
            if !group.is_empty() {
                atom_freqs.push(freq);
                groups.push(group);
            }
        }
        if atoms.is_empty() {
            return Err(Error::InvalidDictionary(
                "every atom vanishes at the observation instants".into(),
            ));
        }

        let matrix = DMatrix::from_column_slice(m, atoms.len(), &columns);
        Ok(Self {
            grid: *grid,
            instants: instants.to_vec(),
            atom_freqs,
            atoms,
            groups,
            matrix,
        })
    }

    /// Attaches the analog chain's amplitude response so that synthesized
    /// signals are referred back to its input.
    pub fn with_response(mut self, response: impl Fn(f64) -> f64) -> Self {
        for atom in &mut self.atoms {
            atom.gain = response(atom.freq);
        }
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn instants(&self) -> &[usize] {
        &self.instants
    }

    pub fn atom_freqs(&self) -> &[f64] {
        &self.atom_freqs
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Group index of `freq`, if it is on the dictionary grid.
    pub fn group_of(&self, freq: f64) -> Option<usize> {
        self.atom_freqs
            .iter()
            .position(|&f| (f - freq).abs() <= 1e-9 * freq.abs().max(1.0))
    }

    /// Synthesizes `Σ c_j φ_j / (norm_j · gain_j)` over the full dense grid,
    /// restricted to atoms carrying `label`.
    pub fn synthesize(&self, coefficients: &[(usize, f64)], label: BandLabel) -> Vec<f64> {
        let n = self.grid.len();
        let rate = self.grid.rate();
        let mut out = alloc::vec![0.0; n];
        for &(j, c) in coefficients {
            let atom = &self.atoms[j];
            if atom.label != label || c == 0.0 {
                continue;
            }
            let scale = c / (atom.norm * atom.gain);
            for (i, o) in out.iter_mut().enumerate() {
                *o += scale * atom.eval(i as f64 / rate);
            }
        }
        out
    }

    /// Amplitude and phase of the tone at `freq` implied by `coefficients`,
    /// as seen at the observation (before undoing the chain gain).
    pub fn tone_estimate(&self, coefficients: &[(usize, f64)], freq: f64) -> Option<(f64, f64)> {
        let group = self.group_of(freq)?;
        let (mut c, mut s) = (0.0, 0.0);
        for &(j, coef) in coefficients {
            if !self.groups[group].contains(&j) {
                continue;
            }
            let atom = &self.atoms[j];
            match atom.kind {
                AtomKind::Cos => c += coef / atom.norm,
                AtomKind::Sin => s += coef / atom.norm,
            }
        }
        // a cos(wt + p) = a cos p cos wt - a sin p sin wt
        Some((libm::hypot(c, s), libm::atan2(-s, c)))
    }
}

pub fn build_dictionary(
    spec: &SignalSpec,
    grid: &TimeGrid,
    instants: &[usize],
    delta_f: f64,
) -> Result<Dictionary> {
    Dictionary::build(
        spec.design_band,
        &spec.interferer_bands,
        grid,
        instants,
        delta_f,
    )
}
