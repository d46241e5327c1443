//! Random states, unitaries and Hermitian matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, CVector};
use crate::quantum::{DensityMatrix, MeasurementBasis};

/// `dim x dim` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(s * re, s * im)
    })
}

/// Hilbert-Schmidt distributed state `G G^H / Tr(G G^H)`.
pub fn hilbert_schmidt_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rng);
    DensityMatrix::from_psd(&g * g.adjoint()).expect("Ginibre product is PSD with positive trace")
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> MeasurementBasis {
    MeasurementBasis::new(haar_unitary(dim, rng)).expect("QR factor is unitary")
}

pub fn haar_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let n = v.norm();
    v.unscale(n)
}

pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::pure(&haar_pure_vector(dim, rng)).expect("normalized vector")
}

/// GUE-style random Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Full-rank state with eigenvalues bounded below by `floor / dim`.
pub fn full_rank_state<R: Rng + ?Sized>(dim: usize, floor: f64, rng: &mut R) -> DensityMatrix {
    hilbert_schmidt_state(dim, rng)
        .depolarize(floor)
        .expect("mixing two valid states")
}
