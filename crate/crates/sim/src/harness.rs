//! Experiment runners behind the CLI.

use anyhow::{bail, Context, Result};
use csrx_core::exec::Executor;
use csrx_core::pates::{evaluate_pattern, select_pattern};
use csrx_core::psd::periodogram;
use csrx_core::rng::derive_seed;
use csrx_core::sigmodel::realize;
use csrx_core::sweep::{self, SweepResult};
use csrx_core::{
    DropPolicy, PatternScore, Receiver, SamplingPattern, Selection, SignalSpec, TimeGrid,
};
use serde::Serialize;

use crate::config::Config;
use crate::pattern_file;

/// Stream label separating the fresh-trial scoring of a selected pattern
/// from the trials it was selected on.
const FRESH: u64 = 0xF2E5;

#[derive(Debug, Clone)]
pub struct Design {
    pub selection: Selection,
    /// The selected pattern and policy rescored on `final_trials` fresh trials.
    pub fresh: PatternScore,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub pattern: SamplingPattern,
    pub policy: DropPolicy,
    pub design: Option<Design>,
    pub result: SweepResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandLabel {
    Desired,
    Interferer,
    None,
}

impl BandLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandLabel::Desired => "desired",
            BandLabel::Interferer => "interferer",
            BandLabel::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdRow {
    pub freq_hz: f64,
    pub psd_db: f64,
    pub band_label: BandLabel,
}

pub fn receiver(config: &Config, pattern: SamplingPattern, policy: DropPolicy) -> Result<Receiver> {
    Ok(Receiver::new(
        config.frontend(),
        pattern,
        policy,
        config.design_band(),
        config.interferer_bands(),
        config.solver(),
    )?)
}

/// Pattern search for the configured brief, plus a fresh-trial rescoring of
/// the winner.
pub fn design<E: Executor>(config: &Config, seed: u64, exec: &E) -> Result<Design> {
    let brief = config.brief()?;
    let (frontend, solver) = (config.frontend(), config.solver());
    let selection = select_pattern(&brief, &frontend, &solver, seed, exec)
        .context("pattern selection failed")?;
    let fresh_brief = csrx_core::DesignBrief {
        trials_per_candidate: config.design.final_trials.max(1),
        ..brief
    };
    let fresh = evaluate_pattern(
        &selection.pattern,
        selection.policy,
        &fresh_brief,
        &frontend,
        &solver,
        derive_seed(seed, &[FRESH]),
        exec,
    )?;
    Ok(Design { selection, fresh })
}

/// Loads the configured pattern file, checking it matches the configured
/// grid and ADC clock.
pub fn load_pattern(config: &Config) -> Result<Option<SamplingPattern>> {
    let Some(path) = config.pattern_file() else {
        return Ok(None);
    };
    let pattern =
        pattern_file::read(path).with_context(|| format!("pattern file {}", path.display()))?;
    let grid = config.grid()?;
    if *pattern.grid() != grid {
        bail!(
            "pattern file {} is for a {} Hz / {} s grid, config uses {} Hz / {} s",
            path.display(),
            pattern.grid().rate(),
            pattern.grid().duration(),
            grid.rate(),
            grid.duration()
        );
    }
    if pattern.decimation() != config.sampling.adc_decimation {
        bail!(
            "pattern file {} uses decimation {}, config uses {}",
            path.display(),
            pattern.decimation(),
            config.sampling.adc_decimation
        );
    }
    Ok(Some(pattern))
}

/// The desired-frequency sweep. The pattern is loaded or designed once, for
/// the design band, and held fixed across every sweep frequency.
pub fn run_sweep<E: Executor>(config: &Config, exec: &E) -> Result<SweepRun> {
    let seed = config.sweep.seed;
    let (pattern, policy, design) = match load_pattern(config)? {
        Some(p) => (p, config.file_policy(), None),
        None => {
            let d = design(config, seed, exec)?;
            (d.selection.pattern.clone(), d.selection.policy, Some(d))
        }
    };
    let rx = receiver(config, pattern.clone(), policy)?;
    let result = sweep::run_sweep(&config.sweep_plan(), &rx, seed, exec)?;
    Ok(SweepRun {
        pattern,
        policy,
        design,
        result,
    })
}

/// Welch PSD of one realization of `spec`, labelled by band.
pub fn run_psd_figure(
    spec: &SignalSpec,
    grid: &TimeGrid,
    segment_len: usize,
    seed: u64,
) -> Result<Vec<PsdRow>> {
    let frame = realize(spec, grid, seed)?;
    let psd = periodogram(&frame, segment_len)?;
    Ok(psd
        .bins
        .iter()
        .map(|b| PsdRow {
            freq_hz: b.freq_hz,
            psd_db: b.db(),
            band_label: if spec.design_band.contains(b.freq_hz) {
                BandLabel::Desired
            } else if spec.interferer_bands.iter().any(|i| i.contains(b.freq_hz)) {
                BandLabel::Interferer
            } else {
                BandLabel::None
            },
        })
        .collect())
}
