//! Bayesian state estimation.
//!
//! A prior over density matrices is represented by weighted particles.
//! Observing a record `M = {E_1 .. E_N}` reweights each particle by its Born
//! likelihood `prod_i Tr(E_i rho)`, and the report is the weighted mean of the
//! particles. A maximum-likelihood estimator is included as the baseline.

mod ensemble;
mod mle;
mod prior;
mod record;
mod risk;

pub use ensemble::{posterior_mean, posterior_update, ParticleEnsemble, PosteriorSummary, Resampling, UpdateOptions};
pub use mle::{mle_estimate, MleEstimate, MleOptions};
pub use prior::{sample_prior, EnsembleMember, PriorKind, PriorSpec};
pub use record::{log_likelihood, MeasurementRecord};
pub use risk::{estimator_risk, Estimator, MeasurementScheme, RiskConfig, RiskRow, RiskSummary, RiskTable};
