use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bayes::record::{log_likelihood_unchecked, MeasurementRecord};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quantum::DensityMatrix;
use crate::rng::{self, Domain};

/// Weighted particles standing in for a distribution over states.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    particles: Vec<DensityMatrix>,
    weights: Vec<f64>,
    log_evidence: f64,
    generation: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosteriorSummary {
    pub mean: DensityMatrix,
    pub log_evidence: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    Disabled,
    /// Systematic resampling whenever ESS drops below half the particle
    /// count; the uniform offset for update `k` comes from stream `(seed, k)`.
    Systematic { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateOptions {
    pub resampling: Resampling,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        UpdateOptions { resampling: Resampling::Systematic { seed: 0 } }
    }
}

impl UpdateOptions {
    pub fn without_resampling() -> Self {
        UpdateOptions { resampling: Resampling::Disabled }
    }
}

impl ParticleEnsemble {
    /// Weights must be non-negative and sum to 1 within `1e-10`; they are
    /// renormalized exactly.
    pub fn new(particles: Vec<DensityMatrix>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::invalid("ensemble needs at least one particle"));
        }
        if particles.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} particles but {} weights",
                particles.len(),
                weights.len()
            )));
        }
        let dim = particles[0].dim();
        if let Some(p) = particles.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !((total - 1.0).abs() <= 1e-10) {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(ParticleEnsemble { particles, weights, log_evidence: 0.0, generation: 0 })
    }

    pub fn uniform(particles: Vec<DensityMatrix>) -> Result<Self> {
        let n = particles.len();
        Self::new(particles, vec![1.0 / n as f64; n])
    }

    pub fn particles(&self) -> &[DensityMatrix] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.particles[0].dim()
    }

    /// `1 / sum w_i^2`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Accumulated `ln p(M)` over every update applied so far.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DensityMatrix, f64)> {
        self.particles.iter().zip(self.weights.iter().copied())
    }

    pub fn summary(&self) -> Result<PosteriorSummary> {
        Ok(PosteriorSummary {
            mean: posterior_mean(self)?,
            log_evidence: self.log_evidence,
            ess: self.effective_sample_size(),
        })
    }

    fn resample_systematic(&mut self, seed: u64) {
        let n = self.len();
        let offset: f64 = rng::stream(seed, Domain::Resampling, self.generation).random::<f64>() / n as f64;
        let mut chosen = Vec::with_capacity(n);
        let mut cumulative = self.weights[0];
        let mut j = 0;
        for k in 0..n {
            let u = offset + k as f64 / n as f64;
            while u >= cumulative && j + 1 < n {
                j += 1;
                cumulative += self.weights[j];
            }
            chosen.push(self.particles[j].clone());
        }
        self.particles = chosen;
        self.weights = vec![1.0 / n as f64; n];
    }
}

/// Bayes' rule with Born likelihoods: `w_i <- w_i prod_k Tr(E_k rho_i)`,
/// renormalized, computed in the log domain.
///
/// `ln sum_i w_i L_i` is added to the running log-evidence. Fails with
/// [`Error::DegeneratePosterior`] when every particle assigns the record zero
/// likelihood.
pub fn posterior_update(
    prior: &ParticleEnsemble,
    record: &MeasurementRecord,
    options: UpdateOptions,
) -> Result<ParticleEnsemble> {
    if record.dim() != prior.dim() {
        return Err(Error::DimensionMismatch { expected: prior.dim(), found: record.dim() });
    }
    if record.is_empty() {
        return Ok(prior.clone());
    }
    let log_terms: Vec<f64> = prior
        .particles
        .par_iter()
        .zip(prior.weights.par_iter())
        .map(|(p, &w)| {
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            match log_likelihood_unchecked(p, record.effects()) {
                ExtReal::Finite(ll) => w.ln() + ll,
                _ => f64::NEG_INFINITY,
            }
        })
        .collect();
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegeneratePosterior);
    }
    let scaled: Vec<f64> = log_terms.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let mut next = ParticleEnsemble {
        particles: prior.particles.clone(),
        weights: scaled.into_iter().map(|w| w / total).collect(),
        log_evidence: prior.log_evidence + max + total.ln(),
        generation: prior.generation + 1,
    };
    if let Resampling::Systematic { seed } = options.resampling {
        if next.effective_sample_size() < next.len() as f64 / 2.0 {
            next.resample_systematic(seed);
        }
    }
    Ok(next)
}

/// `sum_i w_i rho_i`.
pub fn posterior_mean(ensemble: &ParticleEnsemble) -> Result<DensityMatrix> {
    DensityMatrix::convex_combination(ensemble.iter())
}
