//! One receiver instance: frontend, ADC pattern, drop policy and solver,
//! with the dictionary for the full pattern built once up front.

use alloc::borrow::Cow;
use alloc::vec::Vec;

use rand::Rng;

use crate::frontend::{Frontend, FrontendConfig, FrontendOutput};
use crate::recon::{assess, solve, Dictionary, ReconResult, SolverSettings};
use crate::rng::TrialRng;
use crate::sampling::{acquire, DropPolicy, Observation, SamplingPattern};
use crate::sigmodel::{realize_padded, Band, SignalFrame, SignalSpec};
use crate::{Error, Result};

/// SNR reported for aggregation is clamped here so that exact
/// reconstructions (infinite SNR) keep averages finite.
pub const SNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone)]
pub struct Receiver {
    frontend: Frontend,
    pattern: SamplingPattern,
    policy: DropPolicy,
    design_band: Band,
    interferer_bands: Vec<Band>,
    solver: SolverSettings,
    dictionary: Dictionary,
}

/// Everything a single trial produced.
#[derive(Debug, Clone)]
pub struct Trace {
    pub frame: SignalFrame,
    pub front: FrontendOutput,
    pub observation: Observation,
    pub result: ReconResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialOutcome {
    pub spec_fingerprint: u64,
    /// Clamped to [`SNR_CAP_DB`]; 0 dB for unusable acquisitions.
    pub snr_db: f64,
    pub success: bool,
    pub usable: bool,
    pub requested: usize,
    pub kept: usize,
    pub flagged: usize,
    pub dropped: usize,
}

impl TrialOutcome {
    pub fn drop_fraction(&self) -> f64 {
        self.dropped as f64 / self.requested as f64
    }
}

impl Receiver {
    pub fn new(
        frontend: FrontendConfig,
        pattern: SamplingPattern,
        policy: DropPolicy,
        design_band: Band,
        interferer_bands: Vec<Band>,
        solver: SolverSettings,
    ) -> Result<Self> {
        let frontend = Frontend::new(frontend, pattern.grid())?;
        let dictionary = Self::make_dictionary(
            &frontend,
            &pattern,
            design_band,
            &interferer_bands,
            solver.delta_f,
        )?;
        Ok(Self {
            frontend,
            pattern,
            policy,
            design_band,
            interferer_bands,
            solver,
            dictionary,
        })
    }

    fn make_dictionary(
        frontend: &Frontend,
        pattern: &SamplingPattern,
        design_band: Band,
        interferer_bands: &[Band],
        delta_f: f64,
    ) -> Result<Dictionary> {
        Ok(Dictionary::build(
            design_band,
            interferer_bands,
            pattern.grid(),
            &pattern.dense_index_vec(),
            delta_f,
        )?
        .with_response(|f| frontend.response(f)))
    }

    pub fn with_policy(&self, policy: DropPolicy) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn policy(&self) -> &DropPolicy {
        &self.policy
    }

    pub fn frontend(&self) -> &Frontend {
        &self.frontend
    }

    pub fn solver(&self) -> &SolverSettings {
        &self.solver
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    fn dictionary_for(&self, effective: &SamplingPattern) -> Result<Cow<'_, Dictionary>> {
        if effective == &self.pattern {
            return Ok(Cow::Borrowed(&self.dictionary));
        }
        Self::make_dictionary(
            &self.frontend,
            effective,
            self.design_band,
            &self.interferer_bands,
            self.solver.delta_f,
        )
        .map(Cow::Owned)
    }

    /// Runs the full chain on an already realized frame.
    pub fn process(&self, frame: &SignalFrame) -> Result<Trace> {
        let front = self.frontend.process(frame);
        let observation = acquire(&front, &self.pattern, &self.policy)?;
        let dict = self.dictionary_for(&observation.pattern)?;
        let result = solve(&observation, &dict, &self.solver.solver)?;
        let result = assess(
            result,
            frame,
            front.applied_gain,
            self.solver.success_threshold_db,
        )?;
        Ok(Trace {
            frame: frame.clone(),
            front,
            observation,
            result,
        })
    }

    /// Realizes `spec` (with enough margin for the filter) and runs the chain.
    pub fn run(&self, spec: &SignalSpec, seed: u64) -> Result<TrialOutcome> {
        let frame = realize_padded(spec, self.pattern.grid(), self.frontend.margin(), seed)?;
        let fingerprint = spec.fingerprint();
        match self.process(&frame) {
            Ok(trace) => {
                let snr = trace.result.desired_snr_db.unwrap_or(0.0).min(SNR_CAP_DB);
                Ok(TrialOutcome {
                    spec_fingerprint: fingerprint,
                    snr_db: snr,
                    success: trace.result.success,
                    usable: true,
                    requested: trace.observation.requested,
                    kept: trace.observation.pattern.len(),
                    flagged: trace.observation.flagged,
                    dropped: trace.observation.dropped.len(),
                })
            }
            Err(Error::EmptyAcquisition) => Ok(TrialOutcome {
                spec_fingerprint: fingerprint,
                snr_db: 0.0,
                success: false,
                usable: false,
                requested: self.pattern.len(),
                kept: 0,
                flagged: self.pattern.len(),
                dropped: self.pattern.len(),
            }),
            Err(e) => Err(e),
        }
    }

    /// Draws a seed for the realization from a trial stream, then runs.
    pub fn run_with(&self, spec: &SignalSpec, rng: &mut TrialRng) -> Result<TrialOutcome> {
        let seed: u64 = rng.random();
        self.run(spec, seed)
    }
}
