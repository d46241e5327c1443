//! Named inputs: state presets, scoring rules, priors and measurement schemes.
//! Anything that is not a known name is read as a JSON file.

use std::path::Path;

use hers_core::bayes::{MeasurementRecord, MeasurementScheme, PriorSpec};
use hers_core::linalg::{c, CVector};
use hers_core::{DensityMatrix, Povm, ScoringRule};

use crate::error::{CliError, CliResult};

pub const STATE_PRESETS: &[&str] = &["zero", "one", "plus", "maximally-mixed", "bell"];

/// Resolves a preset name; `None` if `name` is not a preset.
pub fn parse_preset(name: &str, dim: Option<usize>) -> Option<CliResult<DensityMatrix>> {
    let qubit_only = |state: DensityMatrix| match dim {
        None | Some(2) => Ok(state),
        Some(d) => Err(CliError::usage(format!("preset `{name}` is a qubit state, got --dim {d}"))),
    };
    let state = match name {
        "zero" | "one" => {
            let d = dim.unwrap_or(2);
            if d < 2 {
                return Some(Err(CliError::usage(format!("preset `{name}` needs dim >= 2"))));
            }
            Ok(DensityMatrix::basis_state(d, usize::from(name == "one")))
        }
        "plus" => qubit_only(DensityMatrix::plus()),
        "maximally-mixed" => match dim.unwrap_or(2) {
            0 => Err(CliError::usage("dim must be >= 1")),
            d if d > hers_core::tol::TENSOR_CAP => {
                Err(CliError::usage(format!("dim {d} exceeds the cap of {}", hers_core::tol::TENSOR_CAP)))
            }
            d => Ok(DensityMatrix::maximally_mixed(d)),
        },
        "bell" => match dim {
            None | Some(4) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let psi = CVector::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
                Ok(DensityMatrix::pure(&psi).expect("normalized"))
            }
            Some(d) => Err(CliError::usage(format!("preset `bell` has dim 4, got --dim {d}"))),
        },
        _ => return None,
    };
    Some(state)
}

fn read_named_file(what: &str, spec: &str, names: &str) -> CliResult<String> {
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::usage(format!("unknown {what} `{spec}`: not one of {names} and no such file")));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::runtime(format!("cannot read {spec}: {e}")))
}

/// A preset name or a path to a density-matrix JSON file.
pub fn load_state(spec: &str, dim: Option<usize>) -> CliResult<DensityMatrix> {
    if let Some(state) = parse_preset(spec, dim) {
        return state;
    }
    let text = read_named_file("state", spec, &STATE_PRESETS.join(", "))?;
    let state = DensityMatrix::from_json_str(&text).map_err(|e| CliError::runtime(format!("{spec}: {e}")))?;
    if let Some(d) = dim {
        if d != state.dim() {
            return Err(CliError::usage(format!("{spec} has dim {}, but --dim {d} was given", state.dim())));
        }
    }
    Ok(state)
}

/// `hers`/`log`/`brier` with offset `c` and scale `d`, or a rule JSON file.
pub fn load_rule(spec: &str, c: Option<f64>, d: Option<f64>) -> CliResult<ScoringRule> {
    let (c0, d0) = (c.unwrap_or(0.0), d.unwrap_or(1.0));
    match spec {
        "hers" | "log" => Ok(ScoringRule::hers(c0, d0).map_err(|e| CliError::usage(e.to_string()))?),
        "brier" => Ok(ScoringRule::brier(c0, d0).map_err(|e| CliError::usage(e.to_string()))?),
        _ => {
            if c.is_some() || d.is_some() {
                return Err(CliError::usage("c and d cannot be combined with a rule file"));
            }
            let text = read_named_file("rule", spec, "hers, log, brier")?;
            ScoringRule::from_json_str(&text).map_err(|e| CliError::runtime(format!("{spec}: {e}")))
        }
    }
}

/// `hilbert-schmidt`/`bures-like` in `dim` (default 2), or a prior JSON file.
pub fn load_prior(spec: &str, dim: Option<usize>) -> CliResult<PriorSpec> {
    let d = dim.unwrap_or(2);
    let named = match spec {
        "hilbert-schmidt" => Some(PriorSpec::hilbert_schmidt(d)),
        "bures-like" => Some(PriorSpec::bures_like(d)),
        _ => None,
    };
    if let Some(p) = named {
        return p.map_err(|e| CliError::usage(e.to_string()));
    }
    let text = read_named_file("prior", spec, "hilbert-schmidt, bures-like")?;
    let prior = PriorSpec::from_json_str(&text).map_err(|e| CliError::runtime(format!("{spec}: {e}")))?;
    if let Some(d) = dim {
        if d != prior.dim() {
            return Err(CliError::usage(format!("{spec} has dim {}, but --dim {d} was given", prior.dim())));
        }
    }
    Ok(prior)
}

/// `random-pauli`, `random-basis`, `sic`, `pauli6`, or a POVM JSON file.
pub fn load_scheme(spec: Option<&str>, dim: usize) -> CliResult<MeasurementScheme> {
    let qubit = |s: MeasurementScheme| {
        if dim == 2 {
            Ok(s)
        } else {
            Err(CliError::usage(format!("scheme `{}` needs dim 2, got {dim}", spec.unwrap_or_default())))
        }
    };
    match spec {
        None => Ok(MeasurementScheme::default_for(dim)),
        Some("random-pauli") => qubit(MeasurementScheme::RandomPauli),
        Some("random-basis") => Ok(MeasurementScheme::RandomBasis),
        Some("sic") => qubit(MeasurementScheme::Fixed(Povm::qubit_sic())),
        Some("pauli6") => qubit(MeasurementScheme::Fixed(Povm::pauli6())),
        Some(path) => {
            let text = read_named_file("scheme", path, "random-pauli, random-basis, sic, pauli6")?;
            let povm = Povm::from_json_str(&text).map_err(|e| CliError::runtime(format!("{path}: {e}")))?;
            if povm.dim() != dim {
                return Err(CliError::usage(format!("{path} has dim {}, prior has dim {dim}", povm.dim())));
            }
            Ok(MeasurementScheme::Fixed(povm))
        }
    }
}

pub fn load_record(path: &str) -> CliResult<MeasurementRecord> {
    let text = read_named_file("record", path, "a JSON record file")?;
    MeasurementRecord::from_json_str(&text).map_err(|e| CliError::runtime(format!("{path}: {e}")))
}
