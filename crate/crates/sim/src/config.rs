//! TOML experiment configuration.
//!
//! Every section and key is optional; omitted values fall back to the
//! reference scenario (20 kHz design band, interferer fixed at 45 kHz in a
//! 40–50 kHz band, 3.16x amplitude, noiseless, 5–95 kHz sweep, OMP).
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use csrx_core::pates::Objective;
use csrx_core::recon::{IrlsSettings, OmpSettings, Solver};
use csrx_core::sweep::{default_sweep_freqs, InterfererMode, SweepPlan};
use csrx_core::{
    Band, DesignBrief, DropMode, DropPolicy, FrontendConfig, SignalSpec, SolverSettings, TimeGrid,
    ToneSpec,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Key reference shown by `--help`.
pub const KEYS_HELP: &str = "\
CONFIG KEYS (TOML; every key optional, defaults shown):
  [grid]      rate_hz = 400000.0          dense simulation rate
              duration_s = 0.01           frame length
  [signal]    design_band_hz = 20000.0    design band is [0, design_band_hz]
              interferer_bands_hz = [[40000.0, 50000.0]]
              desired_amplitude = 1.0
              interferer_amplitude_ratio = 3.16
              noise_std = 0.0
  [sweep]     freqs_hz = [5000.0, 10000.0, ..., 95000.0]
              interferer_mode = \"fixed\"   fixed | co_swept | none
              interferer_hz = 45000.0     fixed frequency, or offset when co_swept
              trials_per_point = 200
              pattern_file = \"\"           load this pattern instead of designing one
              drop_policy = \"keep_all\"    policy used with pattern_file
              seed = 0
  [frontend]  filter_cutoff_hz = 20000.0  defaults to design_band_hz
              filter_order = 8
              agc_target_rms = 0.25
              clip_level = 1.0
              quantizer_bits = 0          0 disables the quantizer, else 4..=16
  [sampling]  adc_decimation = 5          ADC clock = rate_hz / adc_decimation
              max_drop_fraction = 0.05    cap for drop_saturated_capped
  [design]    candidate_count = 50
              trials_per_candidate = 50
              final_trials = 200          fresh trials scoring the selected pattern
              keep_count_min = 4
              keep_count_max = 28
              min_gap_min = 1
              min_gap_max = 8
              freq_step_hz = 1000.0       ensemble frequency grid
              objective = \"max_success_rate\"   max_success_rate | max_worst_snr
  [solver]    kind = \"omp\"                omp | irls
              delta_f_hz = 1000.0         dictionary resolution
              success_threshold_db = 40.0
              omp_max_atoms = 16
              omp_residual_tol = 1e-9
              irls_epsilon_floor = 1e-8
              irls_max_iters = 1000
              irls_penalty = 1e-12
  [psd]       desired_hz = 10000.0
              interferer_hz = 45000.0
              segment_len = 512           power of two
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub signal: SignalSection,
    pub sweep: SweepSection,
    pub frontend: FrontendSection,
    pub sampling: SamplingSection,
    pub design: DesignSection,
    pub solver: SolverSection,
    pub psd: PsdSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub rate_hz: f64,
    pub duration_s: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            rate_hz: 400e3,
            duration_s: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub design_band_hz: f64,
    pub interferer_bands_hz: Vec<[f64; 2]>,
    pub desired_amplitude: f64,
    pub interferer_amplitude_ratio: f64,
    pub noise_std: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            design_band_hz: 20e3,
            interferer_bands_hz: vec![[40e3, 50e3]],
            desired_amplitude: 1.0,
            interferer_amplitude_ratio: 3.16,
            noise_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfererKind {
    Fixed,
    CoSwept,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub freqs_hz: Vec<f64>,
    pub interferer_mode: InterfererKind,
    pub interferer_hz: f64,
    pub trials_per_point: usize,
    /// Empty means "search for a pattern".
    pub pattern_file: String,
    pub drop_policy: DropMode,
    pub seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            freqs_hz: default_sweep_freqs(),
            interferer_mode: InterfererKind::Fixed,
            interferer_hz: 45e3,
            trials_per_point: 200,
            pattern_file: String::new(),
            drop_policy: DropMode::KeepAll,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendSection {
    /// Zero means "use the design band edge".
    pub filter_cutoff_hz: f64,
    pub filter_order: usize,
    pub agc_target_rms: f64,
    pub clip_level: f64,
    pub quantizer_bits: u32,
}

impl Default for FrontendSection {
    fn default() -> Self {
        let d = FrontendConfig::default();
        Self {
            filter_cutoff_hz: 0.0,
            filter_order: d.filter_order,
            agc_target_rms: d.agc_target_rms,
            clip_level: d.clip_level,
            quantizer_bits: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub adc_decimation: usize,
    pub max_drop_fraction: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            adc_decimation: 5,
            max_drop_fraction: DropPolicy::DEFAULT_MAX_DROP_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub candidate_count: usize,
    pub trials_per_candidate: usize,
    pub final_trials: usize,
    pub keep_count_min: usize,
    pub keep_count_max: usize,
    pub min_gap_min: usize,
    pub min_gap_max: usize,
    pub freq_step_hz: f64,
    pub objective: Objective,
}

impl Default for DesignSection {
    fn default() -> Self {
        let b = DesignBrief::default();
        Self {
            candidate_count: b.candidate_count,
            trials_per_candidate: b.trials_per_candidate,
            final_trials: 200,
            keep_count_min: b.keep_count_range.0,
            keep_count_max: b.keep_count_range.1,
            min_gap_min: b.min_gap_range.0,
            min_gap_max: b.min_gap_range.1,
            freq_step_hz: b.freq_step,
            objective: b.objective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Omp,
    Irls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub kind: SolverKind,
    pub delta_f_hz: f64,
    pub success_threshold_db: f64,
    pub omp_max_atoms: usize,
    pub omp_residual_tol: f64,
    pub irls_epsilon_floor: f64,
    pub irls_max_iters: usize,
    pub irls_penalty: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        let (omp, irls) = (OmpSettings::default(), IrlsSettings::default());
        Self {
            kind: SolverKind::Omp,
            delta_f_hz: s.delta_f,
            success_threshold_db: s.success_threshold_db,
            omp_max_atoms: omp.max_atoms,
            omp_residual_tol: omp.residual_tol,
            irls_epsilon_floor: irls.epsilon_floor,
            irls_max_iters: irls.max_iters,
            irls_penalty: irls.penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSection {
    pub desired_hz: f64,
    pub interferer_hz: f64,
    pub segment_len: usize,
}

impl Default for PsdSection {
    fn default() -> Self {
        Self {
            desired_hz: 10e3,
            interferer_hz: 45e3,
            segment_len: 512,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.message().to_owned() + &location(&text, e.span()),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::new(self.grid.rate_hz, self.grid.duration_s).map_err(invalid)
    }

    pub fn design_band(&self) -> Band {
        Band::new(0.0, self.signal.design_band_hz)
    }

    pub fn interferer_bands(&self) -> Vec<Band> {
        self.signal
            .interferer_bands_hz
            .iter()
            .map(|&[lo, hi]| Band::new(lo, hi))
            .collect()
    }

    pub fn frontend(&self) -> FrontendConfig {
        let f = &self.frontend;
        FrontendConfig {
            filter_cutoff: if f.filter_cutoff_hz > 0.0 {
                f.filter_cutoff_hz
            } else {
                self.signal.design_band_hz
            },
            filter_order: f.filter_order,
            agc_target_rms: f.agc_target_rms,
            clip_level: f.clip_level,
            quantizer_bits: (f.quantizer_bits > 0).then_some(f.quantizer_bits),
        }
    }

    pub fn solver(&self) -> SolverSettings {
        let s = &self.solver;
        let solver = match s.kind {
            SolverKind::Omp => Solver::Omp(OmpSettings {
                max_atoms: s.omp_max_atoms,
                residual_tol: s.omp_residual_tol,
            }),
            SolverKind::Irls => Solver::Irls(IrlsSettings {
                epsilon_floor: s.irls_epsilon_floor,
                max_iters: s.irls_max_iters,
                penalty: s.irls_penalty,
            }),
        };
        SolverSettings {
            solver,
            delta_f: s.delta_f_hz,
            success_threshold_db: s.success_threshold_db,
        }
    }

    pub fn brief(&self) -> Result<DesignBrief, ConfigError> {
        let d = &self.design;
        let brief = DesignBrief {
            grid: self.grid()?,
            design_band: self.design_band(),
            interferer_bands: self.interferer_bands(),
            freq_step: d.freq_step_hz,
            desired_amplitude: self.signal.desired_amplitude,
            interferer_amplitude: self.signal.desired_amplitude
                * self.signal.interferer_amplitude_ratio,
            noise_std: self.signal.noise_std,
            adc_decimation: self.sampling.adc_decimation,
            keep_count_range: (d.keep_count_min, d.keep_count_max),
            min_gap_range: (d.min_gap_min, d.min_gap_max),
            max_drop_fraction: self.sampling.max_drop_fraction,
            candidate_count: d.candidate_count,
            trials_per_candidate: d.trials_per_candidate,
            objective: d.objective,
        };
        brief.validate().map_err(invalid)?;
        Ok(brief)
    }

    pub fn sweep_plan(&self) -> SweepPlan {
        let s = &self.sweep;
        SweepPlan {
            design_band: self.design_band(),
            interferer_bands: self.interferer_bands(),
            sweep_freqs: s.freqs_hz.clone(),
            interferer_mode: match s.interferer_mode {
                InterfererKind::Fixed => Some(InterfererMode::Fixed(s.interferer_hz)),
                InterfererKind::CoSwept => Some(InterfererMode::CoSwept(s.interferer_hz)),
                InterfererKind::None => None,
            },
            desired_amplitude: self.signal.desired_amplitude,
            interferer_amplitude_ratio: self.signal.interferer_amplitude_ratio,
            noise_std: self.signal.noise_std,
            trials_per_point: s.trials_per_point,
        }
    }

    /// Policy for a pattern loaded from file.
    pub fn file_policy(&self) -> DropPolicy {
        DropPolicy {
            mode: self.sweep.drop_policy,
            max_drop_fraction: self.sampling.max_drop_fraction,
        }
    }

    pub fn pattern_file(&self) -> Option<&Path> {
        (!self.sweep.pattern_file.is_empty()).then(|| Path::new(&self.sweep.pattern_file))
    }

    /// The two-tone scenario of the PSD figure; phases are random per seed.
    pub fn psd_spec(&self) -> SignalSpec {
        let mut spec = SignalSpec::new(self.design_band())
            .tone(ToneSpec::desired(
                self.psd.desired_hz,
                self.signal.desired_amplitude,
            ))
            .tone(ToneSpec::interferer(
                self.psd.interferer_hz,
                self.signal.desired_amplitude * self.signal.interferer_amplitude_ratio,
            ))
            .noise(self.signal.noise_std);
        for band in self.interferer_bands() {
            spec = spec.interferer_band(band);
        }
        spec
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

fn location(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}
