//! Strictly proper scoring rules and their lift to density-matrix reports.
//!
//! A quantum report `sigma` is scored by measuring the true state in an
//! eigenbasis of `sigma` and paying according to the eigenvalue `s_i` of the
//! observed outcome. For the logarithmic rule (`Hers`) the payoff is
//! `C + D ln s_i`; the expected reward then equals
//! `C - D [H(rho) + S(rho || sigma)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quantum::{born_probabilities, eigendecompose, relative_entropy, von_neumann_entropy};
use crate::quantum::{DensityMatrix, MeasurementBasis, OutcomeDistribution};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Logarithmic score `C + D ln s_i`.
    Hers,
    /// Quadratic score `C + D (2 s_i - sum_j s_j^2)`.
    Brier,
}

/// A scoring rule with offset `c` and strictly positive scale `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct ScoringRule {
    kind: RuleKind,
    c: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    kind: RuleKind,
    c: f64,
    d: f64,
}

impl TryFrom<RawRule> for ScoringRule {
    type Error = Error;
    fn try_from(raw: RawRule) -> Result<Self> {
        ScoringRule::new(raw.kind, raw.c, raw.d)
    }
}

impl From<ScoringRule> for RawRule {
    fn from(r: ScoringRule) -> Self {
        RawRule { kind: r.kind, c: r.c, d: r.d }
    }
}

impl ScoringRule {
    pub fn new(kind: RuleKind, c: f64, d: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid(format!("offset c must be finite, got {c}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid(format!("scale d must be positive and finite, got {d}")));
        }
        Ok(ScoringRule { kind, c, d })
    }

    pub fn hers(c: f64, d: f64) -> Result<Self> {
        Self::new(RuleKind::Hers, c, d)
    }

    pub fn brier(c: f64, d: f64) -> Result<Self> {
        Self::new(RuleKind::Brier, c, d)
    }

    /// `Hers` with `C = 0`, `D = 1`.
    pub fn log() -> Self {
        ScoringRule { kind: RuleKind::Hers, c: 0.0, d: 1.0 }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Payoff when `outcome` occurs and `report` was forecast.
    pub fn payoff(&self, report: &OutcomeDistribution, outcome: usize) -> Result<ExtReal> {
        let s = *report
            .probs()
            .get(outcome)
            .ok_or_else(|| Error::invalid(format!("outcome {outcome} out of range")))?;
        Ok(match self.kind {
            RuleKind::Hers => log_payoff(self.c, self.d, s),
            RuleKind::Brier => ExtReal::Finite(self.c + self.d * brier_term(report.probs(), outcome)),
        })
    }
}

fn log_payoff(c: f64, d: f64, s: f64) -> ExtReal {
    if s <= 0.0 {
        ExtReal::NegInfinity
    } else {
        ExtReal::Finite(c + d * s.ln())
    }
}

fn brier_term(q: &[f64], i: usize) -> f64 {
    2.0 * q[i] - q.iter().map(|x| x * x).sum::<f64>()
}

/// `C + D ln s`; `-inf` at `s = 0`.
pub fn hers_payoff(rule: &ScoringRule, reported_prob: f64) -> Result<ExtReal> {
    if rule.kind != RuleKind::Hers {
        return Err(Error::invalid("hers_payoff requires a Hers rule"));
    }
    if !(0.0..=1.0).contains(&reported_prob) {
        return Err(Error::invalid(format!("probability {reported_prob} outside [0, 1]")));
    }
    Ok(log_payoff(rule.c, rule.d, reported_prob))
}

/// `sum_i p_i R_i(q)`, with `0 * (-inf) = 0`.
///
/// A forecast below `1e-12` counts as zero; truth mass above `1e-10` on such
/// an outcome makes the log score `-inf`.
pub fn classical_expected_score(
    rule: &ScoringRule,
    truth: &OutcomeDistribution,
    report: &OutcomeDistribution,
) -> Result<ExtReal> {
    if truth.len() != report.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: report.len() });
    }
    let (p, q) = (truth.probs(), report.probs());
    match rule.kind {
        RuleKind::Hers => {
            let mut acc = 0.0;
            for (&pi, &qi) in p.iter().zip(q) {
                if qi < tol::SUPPORT {
                    if pi > tol::SUPPORT_WEIGHT {
                        return Ok(ExtReal::NegInfinity);
                    }
                    continue;
                }
                acc += pi * qi.ln();
            }
            Ok(ExtReal::Finite(rule.c + rule.d * acc))
        }
        RuleKind::Brier => {
            let acc: f64 = p.iter().enumerate().map(|(i, &pi)| pi * brier_term(q, i)).sum();
            Ok(ExtReal::Finite(rule.c + rule.d * acc))
        }
    }
}

/// `G(p) = R(p : p)`, the expected score of an honest forecast.
pub fn value_function(rule: &ScoringRule, p: &OutcomeDistribution) -> Result<f64> {
    let v = classical_expected_score(rule, p, p)?;
    Ok(v.finite().expect("an honest forecast never scores -inf"))
}

/// The report's eigenbasis and eigenvalues, with eigenvalues below the
/// support tolerance set to exactly zero.
pub fn report_measurement(report: &DensityMatrix) -> Result<(MeasurementBasis, OutcomeDistribution)> {
    let spec = eigendecompose(report)?;
    let values = spec
        .values
        .into_iter()
        .map(|s| if s < tol::SUPPORT { 0.0 } else { s })
        .collect::<Vec<_>>();
    let total: f64 = values.iter().sum();
    let dist = OutcomeDistribution::new(values.into_iter().map(|s| s / total).collect())?;
    Ok((spec.basis, dist))
}

/// Expected payoff `sum_i p_i R_i` where `p_i` are the Born probabilities
/// of `truth` in the eigenbasis of `report`.
pub fn expected_reward(rule: &ScoringRule, truth: &DensityMatrix, report: &DensityMatrix) -> Result<ExtReal> {
    if truth.dim() != report.dim() {
        return Err(Error::DimensionMismatch { expected: truth.dim(), found: report.dim() });
    }
    let (basis, s) = report_measurement(report)?;
    let p = born_probabilities(truth, &basis)?;
    classical_expected_score(rule, &p, &s)
}

/// `C - D [H(truth) + S(truth || report)]`, the entropic form of the
/// log-score expected reward. Only defined for `Hers`.
pub fn expected_reward_entropic(
    rule: &ScoringRule,
    truth: &DensityMatrix,
    report: &DensityMatrix,
) -> Result<ExtReal> {
    if rule.kind != RuleKind::Hers {
        return Err(Error::invalid("entropic form only exists for the log score"));
    }
    let h = von_neumann_entropy(truth)?;
    let s = relative_entropy(truth, report)?;
    Ok(-(s + h).scale(rule.d) + rule.c)
}

/// Honest expected reward minus the reward for `report`.
pub fn propriety_gap(rule: &ScoringRule, truth: &DensityMatrix, report: &DensityMatrix) -> Result<ExtReal> {
    let honest = expected_reward(rule, truth, truth)?;
    let reported = expected_reward(rule, truth, report)?;
    Ok(honest - reported)
}

/// `sum_k w_k R(rho_k : report)` for a weighted ensemble of truths.
pub fn ensemble_expected_reward<'a>(
    rule: &ScoringRule,
    ensemble: impl IntoIterator<Item = (&'a DensityMatrix, f64)>,
    report: &DensityMatrix,
) -> Result<ExtReal> {
    let (basis, s) = report_measurement(report)?;
    let mut acc = ExtReal::ZERO;
    for (truth, w) in ensemble {
        if w <= 0.0 {
            continue;
        }
        if truth.dim() != report.dim() {
            return Err(Error::DimensionMismatch { expected: report.dim(), found: truth.dim() });
        }
        let p = born_probabilities(truth, &basis)?;
        acc = acc + classical_expected_score(rule, &p, &s)?.scale(w);
        if acc == ExtReal::NegInfinity {
            break;
        }
    }
    Ok(acc)
}
