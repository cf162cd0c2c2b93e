//! Simulation of quantum-like behavior from classical test particles in
//! randomly curved backgrounds.
//!
//! The pipeline: [`ensemble`] draws reproducible random background fields;
//! [`deviation`] integrates the tidal interval dynamics per field and
//! accumulates action phases; [`kernel`] sums the per-field phase factors
//! into propagator estimates and cross-checks them against analytic and
//! lattice routes; [`statistics`] carries the interval/velocity/action
//! density laws and their empirical checks; [`wave`] evolves the geometric
//! wavefunction whose action scale plays the role of the quantum of
//! action; [`hilbert`] supplies the ray-space geometry for state
//! comparison. [`checks`] bundles the oracle comparisons into a runnable
//! suite.

#![forbid(unsafe_code)]
// `!(x > 0.0)` guards reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod deviation;
pub mod ensemble;
pub mod error;
pub mod hilbert;
pub mod kernel;
pub mod oracles;
pub mod rng;
pub mod statistics;
pub mod wave;

pub use error::{Error, Result};
