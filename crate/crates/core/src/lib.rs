//! Simulation and verification toolkit for cavity optomechanical cooling.
//!
//! The crate computes quantum-noise cooling spectra and closed-form cooling
//! limits ([`spectra`]), integrates the exact second-moment dynamics of the
//! linearized optomechanical system ([`covariance`]), implements pulsed
//! cavity-dissipation modulation ([`modulation`]), and cross-validates the
//! moment engine against a truncated Fock-space Lindblad solver
//! ([`lindblad`]). [`params`] owns SI units and the classical working point;
//! every engine runs in dimensionless units with `omega_m = 1`.
//!
//! All types are immutable after construction and all operations are pure,
//! so everything can be called concurrently without synchronization.

// `!(x > 0.0)` validation deliberately treats NaN as invalid; the suggested
// `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod covariance;
pub mod error;
mod linalg;
pub mod lindblad;
pub mod modulation;
pub mod params;
pub mod spectra;

pub use error::{Error, Result};
pub use params::{PhysicalParams, ReducedParams};
