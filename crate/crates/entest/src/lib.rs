//! Optimal estimation of two-qubit pure-state entanglement from N copies.
//!
//! Averaging N copies of an unknown pure two-qubit state over everything
//! except its Schmidt parameter b leaves a block-diagonal effective state
//! whose eigenspaces do not depend on b. Projecting onto those eigenspaces
//! is the minimal measurement that extracts the most information about b,
//! and the same block weights govern the estimation of the degree of mixing
//! of a single-qubit state from N copies.
//!
//! The crate has three layers:
//!
//! - closed-form combinatorics of the block decomposition ([`spectrum`],
//!   [`spin`], [`local`]),
//! - the Bayesian machinery on top of it: priors, posteriors, Kullback
//!   gains, the optimality bound, reparametrization invariance, and a
//!   seeded experiment simulator ([`prior`], [`gain`], [`povm`],
//!   [`reparam`], [`simulate`]),
//! - a desk-scale numerical oracle that rebuilds the averaged states by
//!   explicit group integration and validates every closed form
//!   ([`oracle`]).

pub mod error;
pub mod gain;
pub mod local;
pub mod oracle;
pub mod povm;
pub mod prior;
pub mod quad;
pub mod reparam;
pub mod simulate;
pub mod spectrum;
pub mod spin;

pub use error::{Error, Result};
pub use gain::{average_gain, fit_asymptote, GainReport, LineFit};
pub use local::{local_gain, local_spectrum};
pub use povm::{povm_gain, AbstractPovm};
pub use prior::PriorDensity;
pub use reparam::{reparametrized_gain, ParamMap};
pub use simulate::{simulate_experiment, SimulationTrace};
pub use spectrum::{block_weight, SpectralBlock, Spectrum};
pub use spin::HalfSpin;
