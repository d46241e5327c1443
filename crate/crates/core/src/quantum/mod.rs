//! States, measurements and the information-theoretic quantities on them.

mod entropy;
mod json;
mod measurement;
pub mod random;
mod state;

pub use entropy::{majorizes, relative_entropy, von_neumann_entropy};
pub use json::MatrixJson;
pub(crate) use measurement::check_effect;
pub use measurement::{
    born_probabilities, dephase, Measurement, MeasurementBasis, OutcomeDistribution, Povm,
};
pub use state::{eigendecompose, fidelity, tensor_power, tensor_power_with_cap, DensityMatrix, Spectrum};
