use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid tone #{index}: {reason}")]
    InvalidTone { index: usize, reason: String },

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("invalid frontend config: {0}")]
    InvalidFrontend(String),

    #[error("segment length {segment_len} invalid for {len} samples: {reason}")]
    InvalidSegment {
        segment_len: usize,
        len: usize,
        reason: &'static str,
    },

    #[error("invalid sampling pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern infeasible: {keep_count} samples with gap {min_gap} do not fit in {slots} ADC slots")]
    InfeasiblePattern {
        keep_count: usize,
        min_gap: usize,
        slots: usize,
    },

    #[error("acquisition unusable: every kept sample was dropped")]
    EmptyAcquisition,

    #[error("dictionary: {0}")]
    InvalidDictionary(String),

    #[error("solver: {0}")]
    Solver(String),

    #[error("desired component has zero energy; SNR undefined")]
    ZeroDesiredEnergy,

    #[error("invalid design brief: {0}")]
    InvalidBrief(String),

    #[error("no candidate pattern reached a nonzero success rate")]
    InfeasibleBrief,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}
