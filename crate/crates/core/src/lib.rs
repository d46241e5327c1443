//! Honest quantum state estimation.
//!
//! The crate scores density-matrix reports with the logarithmic reward
//! `C + D ln s_i` (paid on outcome `i` of a measurement in the report's
//! eigenbasis), simulates the verification game between an experimentalist
//! and the party paying her, computes Bayesian posterior means from
//! measurement records, and numerically checks why the per-outcome reward
//! offsets `C_i` have to coincide.
//!
//! Layout:
//!
//! - [`quantum`]: dense Hermitian linear algebra, states, measurements,
//!   entropies, dephasing and majorization.
//! - [`scoring`]: strictly proper scoring rules and their quantum lift.
//! - [`game`]: Monte Carlo simulation of the verification game and the
//!   fidelity counterexample.
//! - [`bayes`]: priors, Born-rule likelihoods, particle posteriors, the
//!   maximum-likelihood baseline and risk studies.
//! - [`appendix`]: the perturbation function `g(t)` and its second derivative.

#![forbid(unsafe_code)]
// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod appendix;
pub mod bayes;
pub mod error;
pub mod ext;
pub mod game;
pub mod linalg;
pub mod quantum;
pub mod rng;
pub mod scoring;
pub mod tol;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use quantum::{DensityMatrix, MeasurementBasis, OutcomeDistribution, Povm};
pub use scoring::{RuleKind, ScoringRule};
