//! Dense complex matrix helpers built on nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entry of `|A - A^H|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `<v|A|v>`, real part (exact for Hermitian `A`).
pub fn expectation(a: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * a * v)[(0, 0)].re
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order with eigenvectors as the matching
/// columns. The input is symmetrized first so round-off in the lower triangle
/// does not leak into the solver.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, tol::EIGEN_MAX_ITERS)
        .ok_or(Error::NoConvergence { dim: n })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence { dim: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `V diag(f(λ)) V^H` from a precomputed eigendecomposition.
pub fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (values, vectors) = eigh(m)?;
    Ok(spectral_map(&values, &vectors, |v| c(f(v), 0.0)))
}

/// `exp(i t X)` for Hermitian `X`, via its eigendecomposition.
pub fn unitary_exp(generator: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, vectors) = eigh(generator)?;
    Ok(spectral_map(&values, &vectors, |v| Complex64::from_polar(1.0, v * t)))
}

/// `(1/2) ||A - B||_1` for Hermitian `A`, `B`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let (values, _) = eigh(&(a - b))?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `A B - B A`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    #[test]
    fn eigh_sorts_descending_and_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.25, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.75, 0.0)]);
        let (values, vectors) = eigh(&m).unwrap();
        assert!(values[0] >= values[1]);
        let back = spectral_map(&values, &vectors, |v| c(v, 0.0));
        assert!(frobenius_distance(&back, &m) < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_finite() {
        let mut m = identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(eigh(&m).is_err());
    }

    #[test]
    fn unitary_exp_matches_nalgebra_exp() {
        let y = pauli_y();
        let t = 0.37;
        let mine = unitary_exp(&y, t).unwrap();
        let reference = (y.map(|z| z * c(0.0, t))).exp();
        assert!(frobenius_distance(&mine, &reference) < 1e-12);
        let should_be_identity = &mine * mine.adjoint();
        assert!(frobenius_distance(&should_be_identity, &identity(2)) < 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors_is_one() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = ONE;
        let mut b = CMatrix::zeros(2, 2);
        b[(1, 1)] = ONE;
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
    }
}
