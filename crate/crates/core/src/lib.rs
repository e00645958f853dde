//! Simulation of three-qubit block quantum source coding.
//!
//! * [`quantum`]: small dense state-vector algebra, entropies and fidelity.
//! * [`coding`]: codewords, the compression unitary and protocols P1/P2/P3.
//! * [`optics`]: single-photon path/polarization circuit realizing the code.
//! * [`experiment`]: Monte Carlo photon counting with imperfect detectors and
//!   interferometers, plus the post-selected fidelity estimators.
//! * [`cli`]: configuration and CSV reports behind the `qsc` binary.

pub mod cli;
pub mod coding;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod optics;
pub mod quantum;

pub use error::{Error, Result};
