use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::quantum::DensityMatrix;
use crate::tol;

/// An orthonormal basis `{|f_i>}`, stored as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: CMatrix,
}

impl MeasurementBasis {
    /// Validates that the columns are orthonormal.
    pub fn new(vectors: CMatrix) -> Result<Self> {
        if !vectors.is_square() || vectors.nrows() == 0 {
            return Err(Error::invalid("basis matrix must be square and nonempty"));
        }
        let gram = vectors.adjoint() * &vectors;
        let residual = (gram - linalg::identity(vectors.nrows())).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if !(residual <= tol::ORTHONORMAL) {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(MeasurementBasis { vectors })
    }

    pub(crate) fn from_trusted(vectors: CMatrix) -> Self {
        MeasurementBasis { vectors }
    }

    pub fn computational(dim: usize) -> Self {
        MeasurementBasis { vectors: linalg::identity(dim) }
    }

    /// Eigenbasis of Pauli X: `|+>, |->`.
    pub fn pauli_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        MeasurementBasis {
            vectors: CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        }
    }

    /// Eigenbasis of Pauli Y: `|+i>, |-i>`.
    pub fn pauli_y() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        MeasurementBasis {
            vectors: CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)]),
        }
    }

    pub fn pauli_z() -> Self {
        Self::computational(2)
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn projector(&self, i: usize) -> CMatrix {
        linalg::projector(&self.vector(i))
    }

    /// Columns are the basis vectors.
    pub fn unitary(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn to_povm(&self) -> Povm {
        Povm { effects: (0..self.dim()).map(|i| self.projector(i)).collect() }
    }
}

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::invalid("POVM needs at least one effect"))?;
        let dim = first.nrows();
        let mut total = CMatrix::zeros(dim, dim);
        for e in &effects {
            check_effect(e, dim)?;
            total += e;
        }
        let residual = (total - linalg::identity(dim)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if !(residual <= tol::POVM_COMPLETENESS) {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(Povm { effects: effects.iter().map(linalg::hermitian_part).collect() })
    }

    /// The six Pauli eigenprojectors, each weighted 1/3.
    pub fn pauli6() -> Self {
        let effects = [MeasurementBasis::pauli_x(), MeasurementBasis::pauli_y(), MeasurementBasis::pauli_z()]
            .iter()
            .flat_map(|b| (0..2).map(move |i| b.projector(i).unscale(3.0)))
            .collect();
        Povm { effects }
    }

    /// Symmetric informationally complete qubit POVM (tetrahedron on the
    /// Bloch sphere), effects `(I + n_k . sigma) / 4`.
    pub fn qubit_sic() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        let effects = dirs
            .iter()
            .map(|&[x, y, z]| {
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[c((1.0 + z) / 4.0, 0.0), c(x / 4.0, -y / 4.0), c(x / 4.0, y / 4.0), c((1.0 - z) / 4.0, 0.0)],
                )
            })
            .collect();
        Povm { effects }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
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
}

/// Checks that `e` is a finite `dim x dim` PSD matrix.
pub(crate) fn check_effect(e: &CMatrix, dim: usize) -> Result<()> {
    if e.nrows() != dim || e.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: e.nrows() });
    }
    let residual = linalg::hermitian_residual(e);
    if !(residual <= tol::HERMITIAN) {
        return Err(Error::NotHermitian { residual });
    }
    let (values, _) = linalg::eigh(e)?;
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -tol::EIGEN_CLAMP {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(())
}

/// Probabilities over measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Entries within `1e-12` of `[0, 1]` are clamped; the total must be 1
    /// within `1e-10`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("distribution needs at least one outcome"));
        }
        let mut clamped = Vec::with_capacity(probs.len());
        for (i, p) in probs.into_iter().enumerate() {
            if !(-tol::PROB_SLACK..=1.0 + tol::PROB_SLACK).contains(&p) {
                return Err(Error::invalid(format!("probability {p} at index {i} outside [0, 1]")));
            }
            clamped.push(p.clamp(0.0, 1.0));
        }
        let total: f64 = clamped.iter().sum();
        if !((total - 1.0).abs() <= tol::PROB_SUM) {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(OutcomeDistribution { probs: clamped })
    }

    pub fn uniform(n: usize) -> Self {
        OutcomeDistribution { probs: vec![1.0 / n as f64; n] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index whose cumulative probability first exceeds `u` in `[0, 1)`.
    ///
    /// Zero-probability outcomes are never returned.
    pub fn inverse_cdf(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

/// Anything that turns a state into outcome probabilities.
pub trait Measurement {
    fn dim(&self) -> usize;
    fn raw_probabilities(&self, state: &DensityMatrix) -> Vec<f64>;
}

impl Measurement for MeasurementBasis {
    fn dim(&self) -> usize {
        MeasurementBasis::dim(self)
    }

    fn raw_probabilities(&self, state: &DensityMatrix) -> Vec<f64> {
        (0..self.dim()).map(|i| linalg::expectation(state.matrix(), &self.vector(i))).collect()
    }
}

impl Measurement for Povm {
    fn dim(&self) -> usize {
        Povm::dim(self)
    }

    fn raw_probabilities(&self, state: &DensityMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| linalg::trace_of_product(e, state.matrix()).re).collect()
    }
}

/// Born rule: `p_i = Tr(E_i rho)`.
pub fn born_probabilities<M: Measurement + ?Sized>(
    state: &DensityMatrix,
    measurement: &M,
) -> Result<OutcomeDistribution> {
    if measurement.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: measurement.dim() });
    }
    let raw = measurement.raw_probabilities(state);
    // Born probabilities of a valid state can only leave [0, 1] by round-off,
    // so renormalize after clamping instead of rejecting.
    let clamped: Vec<f64> = raw.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let total: f64 = clamped.iter().sum();
    OutcomeDistribution::new(clamped.into_iter().map(|p| p / total).collect())
}

/// The completely dephasing channel in `basis`: keeps the diagonal, drops
/// every off-diagonal element.
pub fn dephase(state: &DensityMatrix, basis: &MeasurementBasis) -> Result<DensityMatrix> {
    let probs = born_probabilities(state, basis)?;
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        basis.dim(),
        probs.probs().iter().map(|&p| c(p, 0.0)),
    ));
    DensityMatrix::new(basis.unitary() * diag * basis.unitary().adjoint())
}
