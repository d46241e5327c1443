use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quantum::random::{ginibre, haar_unitary, hilbert_schmidt_state};
use crate::quantum::DensityMatrix;
use crate::rng::{self, Domain};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    /// `G G^H / Tr(G G^H)` with `G` Ginibre.
    HilbertSchmidt,
    /// `(I + U) G G^H (I + U^H)`, normalized, with `U` Haar. An approximation
    /// to the Bures measure.
    BuresLike,
    /// A finite list of states with probabilities.
    DiscreteEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleMember {
    pub state: DensityMatrix,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrior", into = "RawPrior")]
pub struct PriorSpec {
    kind: PriorKind,
    dim: usize,
    ensemble: Vec<EnsembleMember>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    kind: PriorKind,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ensemble: Option<Vec<EnsembleMember>>,
}

impl TryFrom<RawPrior> for PriorSpec {
    type Error = Error;
    fn try_from(raw: RawPrior) -> Result<Self> {
        match (raw.kind, raw.ensemble) {
            (PriorKind::DiscreteEnsemble, Some(members)) => {
                let spec = PriorSpec::discrete(members)?;
                if spec.dim != raw.dim {
                    return Err(Error::DimensionMismatch { expected: raw.dim, found: spec.dim });
                }
                Ok(spec)
            }
            (PriorKind::DiscreteEnsemble, None) => Err(Error::invalid("discrete-ensemble prior needs an ensemble")),
            (kind, None) => PriorSpec::continuous(kind, raw.dim),
            (_, Some(_)) => Err(Error::invalid("only discrete-ensemble priors take an ensemble")),
        }
    }
}

impl From<PriorSpec> for RawPrior {
    fn from(p: PriorSpec) -> Self {
        let ensemble = (p.kind == PriorKind::DiscreteEnsemble).then_some(p.ensemble);
        RawPrior { kind: p.kind, dim: p.dim, ensemble }
    }
}

impl PriorSpec {
    pub fn hilbert_schmidt(dim: usize) -> Result<Self> {
        Self::continuous(PriorKind::HilbertSchmidt, dim)
    }

    pub fn bures_like(dim: usize) -> Result<Self> {
        Self::continuous(PriorKind::BuresLike, dim)
    }

    fn continuous(kind: PriorKind, dim: usize) -> Result<Self> {
        if kind == PriorKind::DiscreteEnsemble {
            return Err(Error::invalid("use PriorSpec::discrete for ensembles"));
        }
        if dim == 0 || dim > tol::TENSOR_CAP {
            return Err(Error::invalid(format!("prior dim must be in 1..={}, got {dim}", tol::TENSOR_CAP)));
        }
        Ok(PriorSpec { kind, dim, ensemble: Vec::new() })
    }

    pub fn discrete(members: Vec<EnsembleMember>) -> Result<Self> {
        let dim = members
            .first()
            .ok_or_else(|| Error::invalid("ensemble must not be empty"))?
            .state
            .dim();
        let mut total = 0.0;
        for m in &members {
            if m.state.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.state.dim() });
            }
            if !(m.probability >= 0.0 && m.probability.is_finite()) {
                return Err(Error::invalid(format!("ensemble probability {} is negative", m.probability)));
            }
            total += m.probability;
        }
        if !((total - 1.0).abs() <= 1e-10) {
            return Err(Error::invalid(format!("ensemble probabilities sum to {total}, not 1")));
        }
        Ok(PriorSpec { kind: PriorKind::DiscreteEnsemble, dim, ensemble: members })
    }

    /// Convenience for `discrete` from `(state, probability)` pairs.
    pub fn from_pairs(pairs: Vec<(DensityMatrix, f64)>) -> Result<Self> {
        Self::discrete(pairs.into_iter().map(|(state, probability)| EnsembleMember { state, probability }).collect())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ensemble(&self) -> &[EnsembleMember] {
        &self.ensemble
    }

    /// The ensemble itself as a weighted particle set, for discrete priors.
    pub fn exact_ensemble(&self) -> Option<ParticleEnsemble> {
        if self.kind != PriorKind::DiscreteEnsemble {
            return None;
        }
        let (particles, weights) = self.ensemble.iter().map(|m| (m.state.clone(), m.probability)).unzip();
        Some(ParticleEnsemble::new(particles, weights).expect("validated ensemble"))
    }

    /// The prior mean when it is known in closed form.
    ///
    /// Both continuous families are unitarily invariant, so their mean is
    /// `I / d`.
    pub fn mean(&self) -> Result<DensityMatrix> {
        match self.kind {
            PriorKind::DiscreteEnsemble => {
                DensityMatrix::convex_combination(self.ensemble.iter().map(|m| (&m.state, m.probability)))
            }
            _ => Ok(DensityMatrix::maximally_mixed(self.dim)),
        }
    }

    /// One draw from the prior.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DensityMatrix {
        match self.kind {
            PriorKind::HilbertSchmidt => hilbert_schmidt_state(self.dim, rng),
            PriorKind::BuresLike => {
                let g = ginibre(self.dim, rng);
                let u = haar_unitary(self.dim, rng);
                let a: CMatrix = linalg::identity(self.dim) + u;
                DensityMatrix::from_psd(&a * &g * g.adjoint() * a.adjoint()).expect("PSD with positive trace")
            }
            PriorKind::DiscreteEnsemble => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for m in &self.ensemble {
                    acc += m.probability;
                    if u < acc {
                        return m.state.clone();
                    }
                }
                self.ensemble.iter().rev().find(|m| m.probability > 0.0).expect("nonempty").state.clone()
            }
        }
    }
}

/// `count` i.i.d. draws with uniform weights. Draw `i` uses its own stream
/// keyed by `(seed, i)`.
pub fn sample_prior(spec: &PriorSpec, count: usize, seed: u64) -> Result<ParticleEnsemble> {
    if count == 0 {
        return Err(Error::invalid("particle count must be >= 1"));
    }
    let particles: Vec<DensityMatrix> = (0..count as u64)
        .into_par_iter()
        .map(|i| spec.draw(&mut rng::stream(seed, Domain::PriorParticle, i)))
        .collect();
    ParticleEnsemble::uniform(particles)
}
