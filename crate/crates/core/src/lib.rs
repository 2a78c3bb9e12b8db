//! Simulation of adiabatic evolution shortened by pi-pulse phase flips.
//!
//! The propagator is split as `U = U_d U_g U_T`: dynamical and geometric
//! phases of the instantaneous eigenstates, and a residual transition part
//! driven by the non-adiabatic couplings. Pulses inserted at the switching
//! times flip the relative phases so that the transition part averages out.

// Negated float comparisons are used on purpose: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod metrics;
pub mod protocols;
pub mod schedule;
pub mod units;
pub mod verification;

pub use error::{Error, Result};
