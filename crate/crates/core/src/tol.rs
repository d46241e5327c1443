//! Numerical tolerances shared across the crate.

/// Max entry of `|A - A^H|` accepted as Hermitian.
pub const HERMITIAN: f64 = 1e-10;
/// Accepted `|Tr - 1|` for states.
pub const TRACE: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are noise and clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;
/// Max entry of `|V^H V - I|` accepted as orthonormal.
pub const ORTHONORMAL: f64 = 1e-10;
/// Max entry of `|sum E_i - I|` accepted as a complete POVM.
pub const POVM_COMPLETENESS: f64 = 1e-10;
/// Outcome probabilities are accepted within this slack of `[0, 1]`.
pub const PROB_SLACK: f64 = 1e-12;
/// Accepted deviation of a distribution's total from 1.
pub const PROB_SUM: f64 = 1e-10;
/// A report eigenvalue below this carries no support.
pub const SUPPORT: f64 = 1e-12;
/// Truth weight on an unsupported direction above this forces an infinite penalty.
pub const SUPPORT_WEIGHT: f64 = 1e-10;
/// Likelihood factors at or below this are treated as zero.
pub const LIKELIHOOD_FLOOR: f64 = 1e-15;
/// Default cap on `dim^n` for tensor powers.
pub const TENSOR_CAP: usize = 256;
/// Iteration cap handed to the Hermitian eigensolver.
pub const EIGEN_MAX_ITERS: usize = 10_000;

/// A state whose top eigenvalue is within this of 1 is treated as pure.
pub const PURITY: f64 = 1e-12;
