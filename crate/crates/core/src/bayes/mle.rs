use serde::Serialize;

use crate::bayes::record::{log_likelihood_unchecked, MeasurementRecord};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, CMatrix};
use crate::quantum::{eigendecompose, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Stop once successive iterates are closer than this in trace distance.
    pub tolerance: f64,
    pub max_iters: usize,
    /// After the iteration, eigenvalues below this are set to zero when doing
    /// so costs no more than `1e-6` in log-likelihood. The fixed point of the
    /// iteration sits on the boundary whenever the data push it there, and
    /// the iterate only approaches it geometrically.
    pub boundary_snap: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { tolerance: 1e-8, max_iters: 10_000, boundary_snap: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MleEstimate {
    pub state: DensityMatrix,
    pub log_likelihood: ExtReal,
    pub iterations: usize,
    pub converged: bool,
}

fn normalized_sandwich(r: &CMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::from_psd(r * rho.matrix() * r)
}

/// Maximum-likelihood estimate by the `R rho R` fixed-point iteration,
/// `rho <- N[R(rho) rho R(rho)]` with `R(rho) = sum_i E_i / Tr(E_i rho)`.
///
/// Starts from `I / d`. When a plain step lowers the likelihood, the step is
/// diluted to `(I + eps R/N) rho (I + eps R/N)` with `eps` halved until the
/// likelihood no longer drops. On non-convergence the best iterate is returned
/// with `converged = false`.
pub fn mle_estimate(record: &MeasurementRecord, dim: usize, options: MleOptions) -> Result<MleEstimate> {
    if record.is_empty() {
        return Err(Error::invalid("maximum likelihood needs a nonempty record"));
    }
    if record.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: record.dim() });
    }
    let effects = record.effects();
    let n = effects.len() as f64;
    let ll = |s: &DensityMatrix| log_likelihood_unchecked(s, effects).to_f64();

    let mut rho = DensityMatrix::maximally_mixed(dim);
    let mut current = ll(&rho);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iters {
        iterations += 1;
        let mut r = CMatrix::zeros(dim, dim);
        for e in effects {
            let p = linalg::trace_of_product(e, rho.matrix()).re.max(f64::MIN_POSITIVE);
            r += e.unscale(p);
        }
        let mut next = normalized_sandwich(&r, &rho)?;
        let mut next_ll = ll(&next);
        if next_ll < current {
            let scaled_r = r.unscale(n);
            let mut eps = 1.0;
            loop {
                let step = (linalg::identity(dim) + scaled_r.scale(eps)).unscale(1.0 + eps);
                next = normalized_sandwich(&step, &rho)?;
                next_ll = ll(&next);
                if next_ll >= current || eps < 1e-10 {
                    break;
                }
                eps *= 0.5;
            }
        }
        let moved = next.trace_distance(&rho)?;
        if next_ll >= current {
            rho = next;
            current = next_ll;
        }
        if moved < options.tolerance || next_ll < current {
            converged = moved < options.tolerance;
            break;
        }
    }

    let state = snap_to_boundary(&rho, current, effects, options.boundary_snap)?;
    Ok(MleEstimate {
        log_likelihood: log_likelihood_unchecked(&state, effects),
        state,
        iterations,
        converged,
    })
}

fn snap_to_boundary(rho: &DensityMatrix, current: f64, effects: &[CMatrix], threshold: f64) -> Result<DensityMatrix> {
    let spec = eigendecompose(rho)?;
    if !spec.values.iter().any(|&v| v > 0.0 && v < threshold) {
        return Ok(rho.clone());
    }
    let snapped = linalg::spectral_map(&spec.values, spec.basis.unitary(), |v| {
        linalg::c(if v < threshold { 0.0 } else { v }, 0.0)
    });
    let candidate = DensityMatrix::from_psd(snapped)?;
    let snapped_ll = log_likelihood_unchecked(&candidate, effects).to_f64();
    Ok(if snapped_ll >= current - 1e-6 { candidate } else { rho.clone() })
}
