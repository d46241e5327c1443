use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, CMatrix};
use crate::quantum::{DensityMatrix, MatrixJson, Povm};
use crate::quantum::check_effect;
use crate::tol;

/// The observed effect `E_i` for each measured copy, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    dim: usize,
    effects: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    dim: usize,
    effects: Vec<MatrixJson>,
}

impl MeasurementRecord {
    /// Validates that every effect is a `dim x dim` PSD matrix.
    pub fn new(dim: usize, effects: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 || dim > tol::TENSOR_CAP {
            return Err(Error::invalid(format!("record dim must be in 1..={}, got {dim}", tol::TENSOR_CAP)));
        }
        for e in &effects {
            check_effect(e, dim)?;
        }
        Ok(MeasurementRecord { dim, effects: effects.iter().map(linalg::hermitian_part).collect() })
    }

    pub fn empty(dim: usize) -> Self {
        MeasurementRecord { dim, effects: Vec::new() }
    }

    /// Record of outcome indices of a fixed POVM.
    pub fn from_outcomes(povm: &Povm, outcomes: &[usize]) -> Result<Self> {
        let effects = outcomes
            .iter()
            .map(|&i| {
                povm.effects()
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("outcome {i} out of range for a {}-outcome POVM", povm.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasurementRecord { dim: povm.dim(), effects })
    }

    /// Record of projective outcomes onto the given states (pure or mixed
    /// density matrices used as effects).
    pub fn from_states(states: &[DensityMatrix]) -> Result<Self> {
        let dim = states.first().map(|s| s.dim()).ok_or_else(|| Error::invalid("use MeasurementRecord::empty"))?;
        Self::new(dim, states.iter().map(|s| s.matrix().clone()).collect())
    }

    pub(crate) fn from_trusted(dim: usize, effects: Vec<CMatrix>) -> Self {
        MeasurementRecord { dim, effects }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawRecord = serde_json::from_str(s)?;
        let effects = raw.effects.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        Self::new(raw.dim, effects)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// The first `n` copies.
    pub fn prefix(&self, n: usize) -> Self {
        MeasurementRecord { dim: self.dim, effects: self.effects[..n.min(self.len())].to_vec() }
    }

    /// Copies `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        MeasurementRecord { dim: self.dim, effects: self.effects[start..end].to_vec() }
    }

    pub fn split_at(&self, n: usize) -> (Self, Self) {
        (self.slice(0, n), self.slice(n, self.len()))
    }

    /// Reorders the copies: entry `k` of the result is copy `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("order is not a permutation"));
            }
        }
        if order.len() != self.len() {
            return Err(Error::invalid("order is not a permutation"));
        }
        Ok(MeasurementRecord { dim: self.dim, effects: order.iter().map(|&i| self.effects[i].clone()).collect() })
    }
}

impl Serialize for MeasurementRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawRecord { dim: self.dim, effects: self.effects.iter().map(MatrixJson::from_matrix).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementRecord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRecord::deserialize(deserializer)?;
        raw.effects
            .iter()
            .map(MatrixJson::to_matrix)
            .collect::<Result<Vec<_>>>()
            .and_then(|effects| MeasurementRecord::new(raw.dim, effects))
            .map_err(serde::de::Error::custom)
    }
}

/// `sum_i ln Tr(E_i rho)`; `-inf` once a factor is at most `1e-15`.
pub fn log_likelihood(state: &DensityMatrix, record: &MeasurementRecord) -> Result<ExtReal> {
    if state.dim() != record.dim {
        return Err(Error::DimensionMismatch { expected: record.dim, found: state.dim() });
    }
    Ok(log_likelihood_unchecked(state, &record.effects))
}

pub(crate) fn log_likelihood_unchecked(state: &DensityMatrix, effects: &[CMatrix]) -> ExtReal {
    let mut acc = 0.0;
    for e in effects {
        let p = linalg::trace_of_product(e, state.matrix()).re;
        if p <= tol::LIKELIHOOD_FLOOR {
            return ExtReal::NegInfinity;
        }
        acc += p.ln();
    }
    ExtReal::Finite(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn likelihood_examples() {
        let zero = DensityMatrix::basis_state(2, 0);
        let one = DensityMatrix::basis_state(2, 1);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(log_likelihood(&mixed, &MeasurementRecord::empty(2)).unwrap(), ExtReal::ZERO);
        let r0 = MeasurementRecord::from_states(std::slice::from_ref(&zero)).unwrap();
        assert_eq!(log_likelihood(&zero, &r0).unwrap(), ExtReal::ZERO);
        assert_eq!(log_likelihood(&one, &r0).unwrap(), ExtReal::NegInfinity);
        let r01 = MeasurementRecord::from_states(&[zero, one]).unwrap();
        let ll = log_likelihood(&mixed, &r01).unwrap().finite().unwrap();
        assert!((ll - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((ll + 2.0 * LN_2).abs() < 1e-15);
        assert!(log_likelihood(&DensityMatrix::maximally_mixed(3), &r01).is_err());
    }

    #[test]
    fn record_validation_and_json() {
        let neg = CMatrix::from_diagonal_element(2, 2, linalg::c(-1.0, 0.0));
        assert!(MeasurementRecord::new(2, vec![neg]).is_err());
        assert!(MeasurementRecord::new(3, vec![linalg::identity(2)]).is_err());
        let r = MeasurementRecord::from_outcomes(&Povm::qubit_sic(), &[0, 3, 3]).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(MeasurementRecord::from_json_str(&s).unwrap(), r);
        assert!(MeasurementRecord::from_outcomes(&Povm::qubit_sic(), &[4]).is_err());
        assert!(r.permuted(&[0, 0, 1]).is_err());
        assert_eq!(r.permuted(&[1, 2, 0]).unwrap().len(), 3);
    }
}
