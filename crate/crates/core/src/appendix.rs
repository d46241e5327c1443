//! Why the per-outcome offsets `C_i` of a log-score reward must be equal.
//!
//! Rotating a state, `sigma(t) = U(t) rho U(t)^H` with `U(t) = exp(i t X)`,
//! and paying `C_i + ln s_i` gives the honest party an expected loss of
//!
//! ```text
//! g(t) = S(rho || sigma(t)) + sum_i C_i [r_i - Tr(rho U(t)|e_i><e_i|U(t)^H)]
//! ```
//!
//! relative to reporting `rho = sum_i r_i |e_i><e_i|`. Propriety needs
//! `g(t) >= 0`. Both `g(0)` and `g'(0)` vanish, and
//! `g''(0) = 2 Tr([X, rho](ln rho + B) X)` with `B = sum_i C_i |e_i><e_i|`.
//! With unequal offsets, choosing `r_j = exp(-(C_j + 2 ln 2)/2)` on two levels
//! makes `g''(0) < 0`, so `g` dips below zero near `t = 0`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, c, CMatrix};
use crate::quantum::random::{full_rank_state, random_hermitian};
use crate::quantum::{eigendecompose, relative_entropy, DensityMatrix, MatrixJson, MeasurementBasis};
use crate::rng::{self, Domain};
use crate::tol;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// A state, a Hermitian generator and per-outcome reward offsets.
#[derive(Debug, Clone)]
pub struct PerturbationCurve {
    eigenvalues: Vec<f64>,
    basis: MeasurementBasis,
    rho: DensityMatrix,
    generator: CMatrix,
    constants: Vec<f64>,
    gen_values: Vec<f64>,
    gen_vectors: CMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    eigenvalues: Vec<f64>,
    basis: MatrixJson,
    generator: MatrixJson,
    constants: Vec<f64>,
}

impl PerturbationCurve {
    /// `rho = sum_i eigenvalues[i] |e_i><e_i|` with `e_i` the columns of
    /// `basis`; `constants[i]` is paid alongside outcome `e_i`.
    pub fn new(eigenvalues: Vec<f64>, basis: MeasurementBasis, generator: CMatrix, constants: Vec<f64>) -> Result<Self> {
        let dim = basis.dim();
        if eigenvalues.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: eigenvalues.len() });
        }
        if constants.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: constants.len() });
        }
        if generator.nrows() != dim || generator.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: generator.nrows() });
        }
        if constants.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("constants must be finite"));
        }
        let residual = linalg::hermitian_residual(&generator);
        if !(residual <= tol::HERMITIAN) {
            return Err(Error::NotHermitian { residual });
        }
        if eigenvalues.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("eigenvalues must be non-negative"));
        }
        let diag = CMatrix::from_fn(dim, dim, |i, j| if i == j { c(eigenvalues[i], 0.0) } else { linalg::ZERO });
        let rho = DensityMatrix::new(basis.unitary() * diag * basis.unitary().adjoint())?;
        let generator = linalg::hermitian_part(&generator);
        let (gen_values, gen_vectors) = linalg::eigh(&generator)?;
        Ok(PerturbationCurve { eigenvalues, basis, rho, generator, constants, gen_values, gen_vectors })
    }

    /// `rho` diagonal in the computational basis.
    pub fn diagonal(eigenvalues: Vec<f64>, generator: CMatrix, constants: Vec<f64>) -> Result<Self> {
        let dim = eigenvalues.len();
        Self::new(eigenvalues, MeasurementBasis::computational(dim), generator, constants)
    }

    /// Uses the (descending) eigendecomposition of `rho`.
    pub fn from_state(rho: &DensityMatrix, generator: CMatrix, constants: Vec<f64>) -> Result<Self> {
        let spec = eigendecompose(rho)?;
        Self::new(spec.values, spec.basis, generator, constants)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawCurve = serde_json::from_str(s)?;
        Self::new(
            raw.eigenvalues,
            MeasurementBasis::new(raw.basis.to_matrix()?)?,
            raw.generator.to_matrix()?,
            raw.constants,
        )
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn is_full_rank(&self) -> bool {
        self.eigenvalues.iter().all(|&r| r >= tol::SUPPORT)
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            return linalg::identity(self.dim());
        }
        linalg::spectral_map(&self.gen_values, &self.gen_vectors, |v| num_complex::Complex64::from_polar(1.0, v * t))
    }

    /// `sigma(t) = U(t) rho U(t)^H`.
    pub fn sigma_at(&self, t: f64) -> Result<DensityMatrix> {
        self.rho.conjugate(&self.unitary(t))
    }

    /// `|<e_i| U(t) |e_j>|^2`.
    fn transition_weights(&self, t: f64) -> CMatrix {
        let e = self.basis.unitary();
        let w = e.adjoint() * self.unitary(t) * e;
        w.map(|z| c(z.norm_sqr(), 0.0))
    }

    /// The expected loss `g(t)` of the honest party.
    ///
    /// For full-rank `rho` both terms are evaluated in `rho`'s eigenbasis
    /// through `W = E^H U(t) E`:
    /// `S = sum_ij |W_ij|^2 r_i (ln r_i - ln r_j)` and
    /// `r_i - p_i = sum_j |W_ji|^2 (r_i - r_j)`, which keeps the `O(t^2)`
    /// value free of cancellation between `O(1)` terms. Rank-deficient `rho`
    /// falls back to the generic relative entropy, which may be `+inf`.
    pub fn g(&self, t: f64) -> Result<ExtReal> {
        if t == 0.0 {
            return Ok(ExtReal::ZERO);
        }
        let n = self.dim();
        let r = &self.eigenvalues;
        let w = self.transition_weights(t);
        let mut offset_term = 0.0;
        for i in 0..n {
            let mut diff = 0.0;
            for j in 0..n {
                diff += w[(j, i)].re * (r[i] - r[j]);
            }
            offset_term += self.constants[i] * diff;
        }
        let divergence = if self.is_full_rank() {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += w[(i, j)].re * r[i] * (r[i].ln() - r[j].ln());
                    }
                }
            }
            ExtReal::Finite(s)
        } else {
            relative_entropy(&self.rho, &self.sigma_at(t)?)?
        };
        Ok(divergence + offset_term)
    }

    /// `2 Tr([X, rho](ln rho + B) X)`; needs full-rank `rho`.
    pub fn second_derivative_analytic(&self) -> Result<f64> {
        if !self.is_full_rank() {
            return Err(Error::invalid("ln rho is undefined for a rank-deficient state"));
        }
        let n = self.dim();
        let e = self.basis.unitary();
        let diag = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(self.eigenvalues[i].ln() + self.constants[i], 0.0)
            } else {
                linalg::ZERO
            }
        });
        let log_plus_b = e * diag * e.adjoint();
        let comm = linalg::commutator(&self.generator, self.rho.matrix());
        Ok(2.0 * linalg::trace_of_product(&(comm * log_plus_b), &self.generator).re)
    }

    /// `(g(h) - 2 g(0) + g(-h)) / h^2`, `h` in `[1e-5, 1e-2]`.
    pub fn second_derivative_numeric(&self, h: f64) -> Result<f64> {
        check_step(h)?;
        let (plus, zero, minus) = (self.finite_g(h)?, self.finite_g(0.0)?, self.finite_g(-h)?);
        Ok((plus - 2.0 * zero + minus) / (h * h))
    }

    /// `(g(h) - g(-h)) / (2h)`.
    pub fn first_derivative_numeric(&self, h: f64) -> Result<f64> {
        check_step(h)?;
        Ok((self.finite_g(h)? - self.finite_g(-h)?) / (2.0 * h))
    }

    fn finite_g(&self, t: f64) -> Result<f64> {
        self.g(t)?
            .finite()
            .ok_or_else(|| Error::invalid(format!("g({t}) is infinite; finite differences need full rank")))
    }

    /// First `t` on the grid `t_max * k / steps`, `k = 1..=steps`, with
    /// `g(t) < 0`.
    pub fn scan_negative(&self, t_max: f64, steps: usize) -> Result<Option<(f64, f64)>> {
        for k in 1..=steps {
            let t = t_max * k as f64 / steps as f64;
            if let ExtReal::Finite(v) = self.g(t)? {
                if v < 0.0 {
                    return Ok(Some((t, v)));
                }
            }
        }
        Ok(None)
    }
}

impl Serialize for PerturbationCurve {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawCurve {
            eigenvalues: self.eigenvalues.clone(),
            basis: MatrixJson::from_matrix(self.basis.unitary()),
            generator: MatrixJson::from_matrix(&self.generator),
            constants: self.constants.clone(),
        }
        .serialize(serializer)
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(Error::invalid(format!("finite-difference step {h} outside [1e-5, 1e-2]")));
    }
    Ok(())
}

/// Pauli X on levels `j`, `k` of a `dim`-level system.
pub fn block_pauli_x(dim: usize, j: usize, k: usize) -> CMatrix {
    let mut x = CMatrix::zeros(dim, dim);
    x[(j, k)] = linalg::ONE;
    x[(k, j)] = linalg::ONE;
    x
}

/// `r = exp(-(C + 2 ln 2) / 2) = exp(-C/2) / 2`.
fn level_for_constant(c: f64) -> f64 {
    (-(c + 2.0 * std::f64::consts::LN_2) / 2.0).exp()
}

/// Three-level curve with `rho = diag(r_1, r_2, 1 - r_1 - r_2)`,
/// `r_j = exp(-(C_j + 2 ln 2)/2)`, offsets `(c1, c2, 0)` and `X` the Pauli X
/// on the first two levels.
pub fn construct_counterexample(c1: f64, c2: f64) -> Result<PerturbationCurve> {
    construct_counterexample_with(c1, c2, 0.0)
}

pub fn construct_counterexample_with(c1: f64, c2: f64, c3: f64) -> Result<PerturbationCurve> {
    if !(c1.is_finite() && c2.is_finite() && c3.is_finite()) {
        return Err(Error::invalid("constants must be finite"));
    }
    if c1 == c2 {
        return Err(Error::invalid("the construction needs C_1 != C_2"));
    }
    let (r1, r2) = (level_for_constant(c1), level_for_constant(c2));
    for (name, r) in [("r_1", r1), ("r_2", r2)] {
        if !(r > 0.0 && r <= 0.5) {
            return Err(Error::invalid(format!("{name} = {r} outside (0, 1/2]; constants must be >= 0")));
        }
    }
    let r3 = 1.0 - r1 - r2;
    if !(0.0..1.0).contains(&r3) {
        return Err(Error::invalid(format!("r_3 = {r3} outside [0, 1)")));
    }
    PerturbationCurve::diagonal(vec![r1, r2, r3], block_pauli_x(3, 0, 1), vec![c1, c2, c3])
}

/// Builds a witness curve for arbitrary offsets with at least two distinct
/// values. Returns `None` when every offset is equal.
///
/// Offsets are shifted so the smaller of the most separated pair is zero
/// (a uniform shift leaves `g` unchanged), the construction is applied to that
/// pair, and the remaining mass is spread evenly over the other levels. If the
/// block Pauli X does not give `g''(0) < 0`, random block-supported Hermitian
/// generators are tried.
pub fn counterexample_for_constants<R: Rng + ?Sized>(constants: &[f64], rng: &mut R) -> Result<Option<PerturbationCurve>> {
    let dim = constants.len();
    if dim < 3 {
        return Err(Error::invalid("offsets are only forced equal for dim >= 3"));
    }
    let (lo, hi) = (0..dim).fold((0, 0), |(lo, hi), i| {
        (if constants[i] < constants[lo] { i } else { lo }, if constants[i] > constants[hi] { i } else { hi })
    });
    if constants[hi] - constants[lo] <= 0.0 {
        return Ok(None);
    }
    let shift = constants[lo];
    let (r_lo, r_hi) = (level_for_constant(0.0), level_for_constant(constants[hi] - shift));
    let rest = (1.0 - r_lo - r_hi) / (dim - 2) as f64;
    let eigenvalues: Vec<f64> = (0..dim)
        .map(|i| if i == lo { r_lo } else if i == hi { r_hi } else { rest })
        .collect();

    let curve = PerturbationCurve::diagonal(eigenvalues.clone(), block_pauli_x(dim, lo, hi), constants.to_vec())?;
    if curve.second_derivative_analytic()? < 0.0 {
        return Ok(Some(curve));
    }
    for _ in 0..1000 {
        let block = random_hermitian(2, rng);
        let mut x = CMatrix::zeros(dim, dim);
        for (a, ia) in [(0, lo), (1, hi)] {
            for (b, ib) in [(0, lo), (1, hi)] {
                x[(ia, ib)] = block[(a, b)];
            }
        }
        let candidate = PerturbationCurve::diagonal(eigenvalues.clone(), x, constants.to_vec())?;
        if candidate.second_derivative_analytic()? < 0.0 {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub curve: PerturbationCurve,
    pub second_derivative: f64,
    /// A `t` in `(0, 0.1]` with `g(t) < 0`, and that value.
    pub negative_at: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub equal_constant_trials: usize,
    pub equal_constant_violations: usize,
    pub min_equal_constant_second_derivative: f64,
    pub max_derivative_mismatch: f64,
    pub derivative_mismatches: usize,
    pub unequal_constant_trials: usize,
    pub unequal_witnesses_found: usize,
    pub canonical_witness: Option<Witness>,
    pub sample_witnesses: Vec<Witness>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("reward-offset verification: dim {} trials {} seed {}\n", self.dim, self.trials, self.seed));
        s.push_str(&format!(
            "equal offsets: {} curves, {} with g''(0) < -1e-10 (min g''(0) = {:.3e})\n",
            self.equal_constant_trials, self.equal_constant_violations, self.min_equal_constant_second_derivative
        ));
        s.push_str(&format!(
            "analytic vs finite difference: {} mismatches, max |diff| / tolerance = {:.3e}\n",
            self.derivative_mismatches, self.max_derivative_mismatch
        ));
        s.push_str(&format!(
            "unequal offsets: {} trials, witness with g''(0) < 0 found in {}\n",
            self.unequal_constant_trials, self.unequal_witnesses_found
        ));
        if let Some(w) = &self.canonical_witness {
            s.push_str(&format!("canonical offsets (0, 2 ln 2, 0): g''(0) = {:.6}", w.second_derivative));
            if let Some((t, v)) = w.negative_at {
                s.push_str(&format!(", g({t}) = {v:.3e}"));
            }
            s.push('\n');
        }
        s.push_str(if self.passed { "result: PASS\n" } else { "result: FAIL\n" });
        s
    }
}

/// Tolerance for analytic vs finite-difference second derivatives.
pub fn derivative_tolerance(analytic: f64) -> f64 {
    f64::max(1e-4, 1e-3 * analytic.abs())
}

fn witness(curve: PerturbationCurve) -> Result<Witness> {
    Ok(Witness {
        second_derivative: curve.second_derivative_analytic()?,
        negative_at: curve.scan_negative(0.1, 1000)?,
        curve,
    })
}

enum TrialOutcome {
    Equal { second: f64, mismatch: f64 },
    Unequal { witness: Option<Box<Witness>> },
}

/// Runs `trials` equal-offset curves (random full-rank `rho`, random `X`) and
/// `trials` unequal-offset constructions in `dim` levels.
pub fn verify_ci_equality(dim: usize, trials: usize, seed: u64) -> Result<VerificationReport> {
    if dim < 3 {
        return Err(Error::invalid(format!(
            "dim {dim} < 3: the log-score characterization (and hence equal offsets) is only forced for at least three outcomes"
        )));
    }
    if dim > tol::TENSOR_CAP {
        return Err(Error::CapExceeded { dim, cap: tol::TENSOR_CAP });
    }
    let outcomes: Vec<TrialOutcome> = (0..2 * trials as u64)
        .into_par_iter()
        .map(|k| -> Result<TrialOutcome> {
            let mut rng = rng::stream(seed, Domain::AppendixTrial, k);
            if k % 2 == 0 {
                let rho = full_rank_state(dim, 0.05, &mut rng);
                let x = random_hermitian(dim, &mut rng);
                let offset: f64 = rng.random_range(-3.0..3.0);
                let curve = PerturbationCurve::from_state(&rho, x, vec![offset; dim])?;
                let second = curve.second_derivative_analytic()?;
                let numeric = curve.second_derivative_numeric(DEFAULT_STEP)?;
                let mismatch = (second - numeric).abs() / derivative_tolerance(second);
                Ok(TrialOutcome::Equal { second, mismatch })
            } else {
                let constants: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..3.0)).collect();
                let witness = counterexample_for_constants(&constants, &mut rng)?
                    .map(witness)
                    .transpose()?
                    .filter(|w| w.second_derivative < 0.0 && w.negative_at.is_some())
                    .map(Box::new);
                Ok(TrialOutcome::Unequal { witness })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = VerificationReport {
        dim,
        trials,
        seed,
        equal_constant_trials: 0,
        equal_constant_violations: 0,
        min_equal_constant_second_derivative: f64::INFINITY,
        max_derivative_mismatch: 0.0,
        derivative_mismatches: 0,
        unequal_constant_trials: 0,
        unequal_witnesses_found: 0,
        canonical_witness: None,
        sample_witnesses: Vec::new(),
        passed: false,
    };
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Equal { second, mismatch } => {
                report.equal_constant_trials += 1;
                if second < -1e-10 {
                    report.equal_constant_violations += 1;
                }
                report.min_equal_constant_second_derivative = report.min_equal_constant_second_derivative.min(second);
                // mismatch is in units of the tolerance
                report.max_derivative_mismatch = report.max_derivative_mismatch.max(mismatch);
                if mismatch > 1.0 {
                    report.derivative_mismatches += 1;
                }
            }
            TrialOutcome::Unequal { witness } => {
                report.unequal_constant_trials += 1;
                if let Some(w) = witness {
                    report.unequal_witnesses_found += 1;
                    if report.sample_witnesses.len() < 3 {
                        report.sample_witnesses.push(*w);
                    }
                }
            }
        }
    }
    let mut canonical = vec![0.0; dim];
    canonical[1] = 2.0 * std::f64::consts::LN_2;
    let mut rng = rng::stream(seed, Domain::AppendixTrial, u64::MAX);
    report.canonical_witness = counterexample_for_constants(&canonical, &mut rng)?.map(witness).transpose()?;
    let canonical_ok = report
        .canonical_witness
        .as_ref()
        .is_some_and(|w| w.second_derivative < 0.0 && w.negative_at.is_some());
    report.passed = report.equal_constant_violations == 0
        && report.derivative_mismatches == 0
        && report.unequal_witnesses_found == report.unequal_constant_trials
        && canonical_ok;
    Ok(report)
}
