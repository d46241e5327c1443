//! JSON wire format for matrices: `{"dim": n, "entries": [[re, im], ...]}`,
//! row-major. States, POVMs and records are validated on load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::quantum::{DensityMatrix, Povm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let expected = self
            .dim
            .checked_mul(self.dim)
            .ok_or_else(|| Error::invalid(format!("dim {} overflows", self.dim)))?;
        if self.dim == 0 {
            return Err(Error::invalid("dim must be >= 1"));
        }
        if self.entries.len() != expected {
            return Err(Error::invalid(format!(
                "dim {} needs {} entries, found {}",
                self.dim,
                expected,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("entries must be finite"));
        }
        Ok(CMatrix::from_row_iterator(
            self.dim,
            self.dim,
            self.entries.iter().map(|&[re, im]| c(re, im)),
        ))
    }
}

impl DensityMatrix {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(s)?;
        DensityMatrix::new(raw.to_matrix()?)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(self.matrix())
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        raw.to_matrix()
            .and_then(DensityMatrix::new)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmJson {
    effects: Vec<MatrixJson>,
}

impl Povm {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PovmJson = serde_json::from_str(s)?;
        let effects = raw.effects.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        Povm::new(effects)
    }
}

impl Serialize for Povm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PovmJson { effects: self.effects().iter().map(MatrixJson::from_matrix).collect() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PovmJson::deserialize(deserializer)?;
        raw.effects
            .iter()
            .map(MatrixJson::to_matrix)
            .collect::<Result<Vec<_>>>()
            .and_then(Povm::new)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_matrix_json_round_trip() {
        let s = serde_json::to_string(&DensityMatrix::plus()).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[[0.5,0.0],[0.5,0.0],[0.5,0.0],[0.5,0.0]]}"#);
        assert_eq!(DensityMatrix::from_json_str(&s).unwrap(), DensityMatrix::plus());
    }

    #[test]
    fn bad_json_is_rejected() {
        for bad in [
            r#"{"dim":2,"entries":[[1,0]]}"#,
            r#"{"dim":0,"entries":[]}"#,
            r#"{"dim":1,"entries":[[0.9,0]]}"#,
            r#"{"dim":1,"entries":[[1,0]],"extra":1}"#,
            r#"{"dim":18446744073709551615,"entries":[]}"#,
            r#"{"dim":1,"entries":[[1e400,0]]}"#,
        ] {
            assert!(DensityMatrix::from_json_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn povm_json_round_trip() {
        let s = serde_json::to_string(&Povm::qubit_sic()).unwrap();
        let back = Povm::from_json_str(&s).unwrap();
        assert_eq!(back.len(), 4);
    }
}
