use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::MeasurementBasis;
use crate::tol;

/// A Hermitian, positive semidefinite, unit-trace matrix.
///
/// Construction validates all three properties; the stored matrix is the
/// exact Hermitian part of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(Error::invalid("density matrix must have dim >= 1"));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        let residual = linalg::hermitian_residual(&mat);
        if residual > tol::HERMITIAN {
            return Err(Error::NotHermitian { residual });
        }
        let mat = linalg::hermitian_part(&mat);
        let residual = (linalg::trace(&mat).re - 1.0).abs();
        if residual > tol::TRACE {
            return Err(Error::InvalidTrace { residual });
        }
        let (values, _) = linalg::eigh(&mat)?;
        let min_eigenvalue = *values.last().expect("dim >= 1");
        if min_eigenvalue < -tol::EIGEN_CLAMP {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { mat })
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn from_psd(mat: CMatrix) -> Result<Self> {
        let tr = linalg::trace(&mat).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::invalid(format!("cannot normalize matrix with trace {tr}")));
        }
        Self::new(linalg::hermitian_part(&mat).unscale(tr))
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("pure state vector must be nonzero"));
        }
        let v = psi.unscale(norm);
        Self::new(linalg::projector(&v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 1);
        DensityMatrix { mat: linalg::identity(dim).unscale(dim as f64) }
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(k, k)] = linalg::ONE;
        DensityMatrix { mat }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let mut mat = CMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            mat[(i, i)] = linalg::c(p, 0.0);
        }
        Self::new(mat)
    }

    /// `|+><+|` for a qubit.
    pub fn plus() -> Self {
        DensityMatrix { mat: CMatrix::from_element(2, 2, linalg::c(0.5, 0.0)) }
    }

    /// Qubit state with Bloch vector `r`, `|r| <= 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let mat = CMatrix::from_row_slice(
            2,
            2,
            &[
                linalg::c((1.0 + z) / 2.0, 0.0),
                linalg::c(x / 2.0, -y / 2.0),
                linalg::c(x / 2.0, y / 2.0),
                linalg::c((1.0 - z) / 2.0, 0.0),
            ],
        );
        Self::new(mat)
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.mat;
        Some([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<Self> {
        check_dims(self, other)?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid(format!("mixing weight {weight} outside [0, 1]")));
        }
        Self::new(self.mat.scale(1.0 - weight) + other.mat.scale(weight))
    }

    /// Depolarizes toward `I/d` with the given noise weight.
    pub fn depolarize(&self, noise: f64) -> Result<Self> {
        self.mix(&DensityMatrix::maximally_mixed(self.dim()), noise)
    }

    /// `U rho U^H` for a unitary `U`.
    pub fn conjugate(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: unitary.nrows() });
        }
        Self::new(unitary * &self.mat * unitary.adjoint())
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        check_dims(self, other)?;
        linalg::trace_distance(&self.mat, &other.mat)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::frobenius_distance(&self.mat, &other.mat)
    }

    /// Weighted average of states; weights must be non-negative and sum to 1.
    pub fn convex_combination<'a>(
        states: impl IntoIterator<Item = (&'a DensityMatrix, f64)>,
    ) -> Result<Self> {
        let mut acc: Option<CMatrix> = None;
        for (state, w) in states {
            let term = state.mat.scale(w);
            acc = Some(match acc {
                None => term,
                Some(a) => {
                    if a.nrows() != term.nrows() {
                        return Err(Error::DimensionMismatch { expected: a.nrows(), found: term.nrows() });
                    }
                    a + term
                }
            });
        }
        Self::new(acc.ok_or_else(|| Error::invalid("empty convex combination"))?)
    }

    pub(crate) fn from_trusted(mat: CMatrix) -> Self {
        DensityMatrix { mat }
    }
}

pub(crate) fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Eigenvalues (descending, clamped at zero) and a matching eigenbasis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub basis: MeasurementBasis,
}

pub fn eigendecompose(state: &DensityMatrix) -> Result<Spectrum> {
    let (values, vectors) = linalg::eigh(state.matrix())?;
    let values = values.into_iter().map(|v| v.max(0.0)).collect();
    Ok(Spectrum { values, basis: MeasurementBasis::from_trusted(vectors) })
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
///
/// For a pure `b = |psi><psi|` this is `<psi|a|psi>`, which is used directly:
/// square roots of round-off eigenvalues (~1e-17) would otherwise add ~1e-8.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    for (pure, other) in [(a, b), (b, a)] {
        let (values, vectors) = linalg::eigh(pure.matrix())?;
        if values[0] >= 1.0 - tol::PURITY {
            let psi = vectors.column(0).into_owned();
            return Ok(linalg::expectation(other.matrix(), &psi).clamp(0.0, 1.0));
        }
    }
    let sqrt_a = linalg::hermitian_function(a.matrix(), |v| v.max(0.0).sqrt())?;
    let inner = &sqrt_a * b.matrix() * &sqrt_a;
    let (values, _) = linalg::eigh(&inner)?;
    let root_trace: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

pub fn tensor_power(state: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_with_cap(state, n, tol::TENSOR_CAP)
}

pub fn tensor_power_with_cap(state: &DensityMatrix, n: usize, cap: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::invalid("tensor power requires n >= 1"));
    }
    let total = u32::try_from(n)
        .ok()
        .and_then(|e| state.dim().checked_pow(e))
        .unwrap_or(usize::MAX);
    if total > cap {
        return Err(Error::CapExceeded { dim: total, cap });
    }
    let mut acc = state.matrix().clone();
    for _ in 1..n {
        acc = linalg::kron(&acc, state.matrix());
    }
    Ok(DensityMatrix::from_trusted(acc))
}
