//! Behavioral model of a compressed-sensing direct-conversion receiver.
//!
//! The chain modeled here starts at the real-valued baseband signal after
//! down-conversion:
//!
//! ```text
//! sigmodel ──> frontend ──> sampling ──> recon ──> assess
//!  (tones)    (loose LPF,   (uniform ADC   (band-restricted
//!              AGC, clip)    clock + drops)  OMP / IRLS)
//! ```
//!
//! [`pates`] wraps the chain in a seeded Monte Carlo loop that scores and
//! selects sampling patterns, and [`sweep`] reruns a fixed pattern while the
//! desired tone is moved across (and out of) the design band.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `csrx` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod exec;
pub mod frontend;
pub mod pates;
pub mod pipeline;
pub mod psd;
pub mod recon;
pub mod rng;
pub mod sampling;
pub mod sigmodel;
pub mod sweep;

pub use error::{Error, Result};
pub use frontend::{Frontend, FrontendConfig, FrontendOutput};
pub use pates::{DesignBrief, Objective, PatternScore, Selection};
pub use pipeline::{Receiver, TrialOutcome};
pub use recon::{Dictionary, ReconResult, SolverSettings};
pub use sampling::{DropMode, DropPolicy, Observation, SamplingPattern};
pub use sigmodel::{Band, SignalFrame, SignalSpec, TimeGrid, ToneRole, ToneSpec};
