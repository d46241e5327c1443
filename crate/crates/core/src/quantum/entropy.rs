use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg;
use crate::quantum::state::check_dims;
use crate::quantum::{eigendecompose, DensityMatrix};
use crate::tol;

/// `-sum p ln p` with `0 ln 0 = 0`.
pub(crate) fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `H(rho) = -Tr rho ln rho`, in nats.
pub fn von_neumann_entropy(state: &DensityMatrix) -> Result<f64> {
    let spec = eigendecompose(state)?;
    Ok(shannon_entropy(&spec.values).clamp(0.0, (state.dim() as f64).ln()))
}

/// `S(truth || report) = Tr truth (ln truth - ln report)`, in nats.
///
/// Infinite when `truth` puts weight above `1e-10` on a direction where
/// `report` has an eigenvalue below `1e-12`.
pub fn relative_entropy(truth: &DensityMatrix, report: &DensityMatrix) -> Result<ExtReal> {
    check_dims(truth, report)?;
    let report_spec = eigendecompose(report)?;
    // Tr(truth ln report), evaluated in the report's eigenbasis.
    let mut cross = 0.0;
    for (i, &s) in report_spec.values.iter().enumerate() {
        let weight = linalg::expectation(truth.matrix(), &report_spec.basis.vector(i));
        if s < tol::SUPPORT {
            if weight > tol::SUPPORT_WEIGHT {
                return Ok(ExtReal::PosInfinity);
            }
            continue;
        }
        cross += weight * s.ln();
    }
    let truth_spec = eigendecompose(truth)?;
    let neg_entropy = -shannon_entropy(&truth_spec.values);
    Ok(ExtReal::Finite((neg_entropy - cross).max(0.0)))
}

/// Prefix-sum test: `a` majorizes `b` when every partial sum of `a` (sorted
/// descending) is at least the matching partial sum of `b`, up to `1e-10`.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    for (name, v) in [("a", a), ("b", b)] {
        let total: f64 = v.iter().sum();
        if !((total - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(format!("{name} sums to {total}, not 1")));
        }
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sa += x;
        sb += y;
        if sa < sb - 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}
