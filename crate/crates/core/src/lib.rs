//! Entanglement and discord dynamics of two non-interacting qubits driven by
//! classical random telegraph noise with a `1/f^α` spectrum.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`] two-qubit density matrices, Bell mixtures, partial transpose, entropy.
//! - [`correlations`] negativity and discord (closed form for Bell-diagonal states,
//!   plus a brute-force measurement sweep used as an oracle).
//! - [`rtn`] single telegraph fluctuator: dephasing factor `D_{mν}(t)`, phase
//!   distribution, trajectories and their exact phase integrals.
//! - [`spectra`] power-law switching-rate distributions and `1/f^α` spectra.
//! - [`dynamics`] analytic coefficient time series for every environment configuration.
//! - [`mc`] Monte Carlo trajectory engine that checks the analytic results.
//!
//! Units: the coupling `ν` is fixed to 1, so rates are `γ/ν` and times are `νt`.

pub mod correlations;
pub mod dynamics;
mod error;
pub mod mc;
pub mod peaks;
pub mod qstate;
pub mod quad;
pub mod rng;
pub mod rtn;
pub mod special;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
