//! Estimator risk studies: draw truths, simulate records, estimate, and score
//! each estimate by `S(truth || estimate)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    mle_estimate, posterior_mean, posterior_update, sample_prior, MeasurementRecord, MleOptions, ParticleEnsemble,
    PriorSpec, Resampling, UpdateOptions,
};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::CMatrix;
use crate::quantum::random::haar_basis;
use crate::quantum::{born_probabilities, eigendecompose, relative_entropy, DensityMatrix, MeasurementBasis, Povm};
use crate::rng::{self, Domain};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    BayesMean,
    Mle,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::BayesMean => "bayes-mean",
            Estimator::Mle => "mle",
        }
    }
}

/// How each copy is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementScheme {
    /// Qubits only: a uniformly random Pauli basis per copy.
    RandomPauli,
    /// A Haar-random orthonormal basis per copy.
    RandomBasis,
    /// The same POVM on every copy.
    Fixed(Povm),
}

impl MeasurementScheme {
    /// Random Pauli bases for qubits, Haar-random bases otherwise.
    pub fn default_for(dim: usize) -> Self {
        if dim == 2 {
            MeasurementScheme::RandomPauli
        } else {
            MeasurementScheme::RandomBasis
        }
    }

    /// Samples the observed effect for one copy of `truth`.
    pub fn sample_effect<R: Rng + ?Sized>(&self, truth: &DensityMatrix, rng: &mut R) -> Result<CMatrix> {
        let pick = |basis: &MeasurementBasis, rng: &mut R| -> Result<CMatrix> {
            let p = born_probabilities(truth, basis)?;
            Ok(basis.projector(p.inverse_cdf(rng.random())))
        };
        match self {
            MeasurementScheme::RandomPauli => {
                if truth.dim() != 2 {
                    return Err(Error::invalid("random Pauli measurements need a qubit"));
                }
                let basis = match rng.random_range(0..3) {
                    0 => MeasurementBasis::pauli_x(),
                    1 => MeasurementBasis::pauli_y(),
                    _ => MeasurementBasis::pauli_z(),
                };
                pick(&basis, rng)
            }
            MeasurementScheme::RandomBasis => {
                let basis = haar_basis(truth.dim(), rng);
                pick(&basis, rng)
            }
            MeasurementScheme::Fixed(povm) => {
                let p = born_probabilities(truth, povm)?;
                Ok(povm.effects()[p.inverse_cdf(rng.random())].clone())
            }
        }
    }

    /// `copies` simulated outcomes on copies of `truth`.
    pub fn simulate<R: Rng + ?Sized>(&self, truth: &DensityMatrix, copies: usize, rng: &mut R) -> Result<MeasurementRecord> {
        let effects = (0..copies).map(|_| self.sample_effect(truth, rng)).collect::<Result<Vec<_>>>()?;
        Ok(MeasurementRecord::from_trusted(truth.dim(), effects))
    }
}

#[derive(Debug, Clone)]
pub struct RiskConfig {
    pub prior: PriorSpec,
    pub trials: usize,
    /// Record lengths `N` to evaluate. Each trial uses nested prefixes of one
    /// simulated record.
    pub copies: Vec<usize>,
    pub scheme: MeasurementScheme,
    pub estimators: Vec<Estimator>,
    /// Particles for continuous priors; discrete priors use their exact ensemble.
    pub particles: usize,
    pub seed: u64,
    /// Fixed truths, cycled over trials. When `None`, truths are prior draws.
    pub truths: Option<Vec<DensityMatrix>>,
    pub mle: MleOptions,
    pub resampling: bool,
}

impl RiskConfig {
    pub fn new(prior: PriorSpec, trials: usize, copies: Vec<usize>, seed: u64) -> Self {
        let scheme = MeasurementScheme::default_for(prior.dim());
        RiskConfig {
            prior,
            trials,
            copies,
            scheme,
            estimators: vec![Estimator::BayesMean, Estimator::Mle],
            particles: 10_000,
            seed,
            truths: None,
            mle: MleOptions::default(),
            resampling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub estimator: Estimator,
    #[serde(rename = "N")]
    pub copies: usize,
    pub trial: usize,
    pub relative_entropy_risk: ExtReal,
    pub trace_distance: f64,
    pub rank_deficient_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskSummary {
    pub estimator: Estimator,
    #[serde(rename = "N")]
    pub copies: usize,
    pub trials: usize,
    pub mean_risk: ExtReal,
    pub median_risk: ExtReal,
    pub p90_risk: ExtReal,
    pub infinite_risk_frequency: f64,
    pub mean_trace_distance: f64,
    pub median_trace_distance: f64,
    pub rank_deficient_frequency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskTable {
    pub prior: PriorSpec,
    pub rows: Vec<RiskRow>,
    pub summaries: Vec<RiskSummary>,
}

/// Nearest-rank quantile of an already sorted slice.
fn quantile<T: Copy>(sorted: &[T], q: f64) -> T {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn score(truth: &DensityMatrix, estimate: &DensityMatrix) -> Result<(ExtReal, f64, bool)> {
    let risk = relative_entropy(truth, estimate)?;
    let td = truth.trace_distance(estimate)?;
    let min_eig = eigendecompose(estimate)?.values.last().copied().unwrap_or(0.0);
    Ok((risk, td, min_eig < tol::SUPPORT))
}

pub fn estimator_risk(config: &RiskConfig) -> Result<RiskTable> {
    if config.trials == 0 {
        return Err(Error::invalid("risk study needs at least one trial"));
    }
    if config.estimators.is_empty() || config.copies.is_empty() {
        return Err(Error::invalid("risk study needs estimators and record lengths"));
    }
    if let Some(truths) = &config.truths {
        if truths.is_empty() {
            return Err(Error::invalid("fixed truth list is empty"));
        }
        if let Some(t) = truths.iter().find(|t| t.dim() != config.prior.dim()) {
            return Err(Error::DimensionMismatch { expected: config.prior.dim(), found: t.dim() });
        }
    }
    let dim = config.prior.dim();
    let mut lengths = config.copies.clone();
    lengths.sort_unstable();
    lengths.dedup();
    let longest = *lengths.last().expect("nonempty");

    let prior_particles: Option<ParticleEnsemble> = if config.estimators.contains(&Estimator::BayesMean) {
        Some(match config.prior.exact_ensemble() {
            Some(e) => e,
            None => sample_prior(&config.prior, config.particles, config.seed)?,
        })
    } else {
        None
    };

    let per_trial: Vec<Vec<RiskRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<RiskRow>> {
            let truth = match &config.truths {
                Some(ts) => ts[trial % ts.len()].clone(),
                None => config.prior.draw(&mut rng::stream(config.seed, Domain::RiskTruth, trial as u64)),
            };
            let mut record_rng = rng::stream(config.seed, Domain::RiskRecord, trial as u64);
            let record = config.scheme.simulate(&truth, longest, &mut record_rng)?;
            let mut rows = Vec::new();
            for &estimator in &config.estimators {
                match estimator {
                    Estimator::BayesMean => {
                        let options = UpdateOptions {
                            resampling: if config.resampling {
                                Resampling::Systematic { seed: config.seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) }
                            } else {
                                Resampling::Disabled
                            },
                        };
                        let mut ensemble = prior_particles.clone().expect("sampled above");
                        let mut done = 0;
                        for &n in &lengths {
                            ensemble = posterior_update(&ensemble, &record.slice(done, n), options)?;
                            done = n;
                            let (risk, td, deficient) = score(&truth, &posterior_mean(&ensemble)?)?;
                            rows.push(RiskRow {
                                estimator,
                                copies: n,
                                trial,
                                relative_entropy_risk: risk,
                                trace_distance: td,
                                rank_deficient_flag: deficient,
                            });
                        }
                    }
                    Estimator::Mle => {
                        for &n in &lengths {
                            let estimate = if n == 0 {
                                DensityMatrix::maximally_mixed(dim)
                            } else {
                                mle_estimate(&record.prefix(n), dim, config.mle)?.state
                            };
                            let (risk, td, deficient) = score(&truth, &estimate)?;
                            rows.push(RiskRow {
                                estimator,
                                copies: n,
                                trial,
                                relative_entropy_risk: risk,
                                trace_distance: td,
                                rank_deficient_flag: deficient,
                            });
                        }
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<RiskRow> = per_trial.into_iter().flatten().collect();
    let order = |e: Estimator| config.estimators.iter().position(|&x| x == e).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (order(r.estimator), r.copies, r.trial));

    let mut summaries = Vec::new();
    for &estimator in &config.estimators {
        for &n in &lengths {
            let group: Vec<&RiskRow> = rows.iter().filter(|r| r.estimator == estimator && r.copies == n).collect();
            let count = group.len() as f64;
            let mut risks: Vec<ExtReal> = group.iter().map(|r| r.relative_entropy_risk).collect();
            risks.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
            let mut tds: Vec<f64> = group.iter().map(|r| r.trace_distance).collect();
            tds.sort_by(f64::total_cmp);
            let mean_risk = risks.iter().fold(ExtReal::ZERO, |a, &b| a + b).scale(1.0 / count);
            summaries.push(RiskSummary {
                estimator,
                copies: n,
                trials: group.len(),
                mean_risk,
                median_risk: quantile(&risks, 0.5),
                p90_risk: quantile(&risks, 0.9),
                infinite_risk_frequency: risks.iter().filter(|r| !r.is_finite()).count() as f64 / count,
                mean_trace_distance: tds.iter().sum::<f64>() / count,
                median_trace_distance: quantile(&tds, 0.5),
                rank_deficient_frequency: group.iter().filter(|r| r.rank_deficient_flag).count() as f64 / count,
            });
        }
    }
    Ok(RiskTable { prior: config.prior.clone(), rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_nearest_rank() {
        let v = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(quantile(&v, 0.5), 5);
        assert_eq!(quantile(&v, 0.9), 9);
        assert_eq!(quantile(&v, 0.0), 1);
        assert_eq!(quantile(&[7], 0.9), 7);
    }

    #[test]
    fn maximally_mixed_truth_has_zero_risk_at_n0() {
        let mut cfg = RiskConfig::new(PriorSpec::hilbert_schmidt(2).unwrap(), 3, vec![0], 5);
        cfg.truths = Some(vec![DensityMatrix::maximally_mixed(2)]);
        cfg.estimators = vec![Estimator::BayesMean];
        cfg.particles = 20_000;
        let table = estimator_risk(&cfg).unwrap();
        // The particle mean differs from I/2 by O(1/sqrt(particles)); the
        // relative entropy is quadratic in that offset.
        for row in &table.rows {
            assert!(row.relative_entropy_risk.finite().unwrap() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let prior = PriorSpec::hilbert_schmidt(2).unwrap();
        assert!(estimator_risk(&RiskConfig::new(prior.clone(), 0, vec![1], 1)).is_err());
        assert!(estimator_risk(&RiskConfig::new(prior.clone(), 1, vec![], 1)).is_err());
        let mut cfg = RiskConfig::new(prior, 1, vec![1], 1);
        cfg.truths = Some(vec![DensityMatrix::maximally_mixed(3)]);
        assert!(estimator_risk(&cfg).is_err());
    }
}
