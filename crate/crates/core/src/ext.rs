//! Extended reals for rewards and divergences.
//!
//! Infinite rewards are a first-class outcome of the log score (a report that
//! assigns zero probability to an event that happens), so they are carried as
//! distinct variants rather than as large sentinels.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps IEEE infinities onto the infinite variants.
    ///
    /// NaN is not representable; passing it is a logic error.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(!x.is_nan(), "NaN cannot be an extended real");
        if x == f64::INFINITY {
            ExtReal::PosInfinity
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInfinity
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// IEEE view, for plotting and tolerance checks.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInfinity => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    /// Multiplies by a strictly positive constant.
    pub fn scale(self, k: f64) -> Self {
        debug_assert!(k > 0.0);
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(k * x),
            other => other,
        }
    }

    /// Sum that reports `None` for `+inf + -inf`.
    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        use ExtReal::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (NegInfinity, PosInfinity) | (PosInfinity, NegInfinity) => None,
            (NegInfinity, _) | (_, NegInfinity) => Some(NegInfinity),
            (PosInfinity, _) | (_, PosInfinity) => Some(PosInfinity),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    /// Panics on `+inf + -inf`.
    fn add(self, rhs: ExtReal) -> ExtReal {
        self.checked_add(rhs)
            .expect("indeterminate sum of opposite infinities")
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInfinity => ExtReal::PosInfinity,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInfinity => ExtReal::NegInfinity,
        }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInfinity => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => f.write_str("inf"),
        }
    }
}

// JSON has no infinities: finite values are numbers, the rest the strings
// "inf" and "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::NegInfinity => serializer.serialize_str("-inf"),
            ExtReal::PosInfinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                if v.is_finite() {
                    Ok(ExtReal::Finite(v))
                } else {
                    Err(E::custom("non-finite number"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PosInfinity),
                    "-inf" => Ok(ExtReal::NegInfinity),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_absorbs_infinities() {
        let m = ExtReal::NegInfinity;
        assert_eq!(m + 3.0, ExtReal::NegInfinity);
        assert_eq!(-m, ExtReal::PosInfinity);
        assert_eq!(ExtReal::Finite(1.0) - ExtReal::NegInfinity, ExtReal::PosInfinity);
        assert_eq!(ExtReal::PosInfinity.checked_add(m), None);
        assert_eq!(m.scale(2.0), m);
    }

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        assert!(ExtReal::NegInfinity < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInfinity);
        assert_eq!(ExtReal::Finite(2.0).max(ExtReal::NegInfinity), ExtReal::Finite(2.0));
    }

    #[test]
    fn json_uses_strings_for_infinities() {
        let v = vec![ExtReal::Finite(0.5), ExtReal::NegInfinity, ExtReal::PosInfinity];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.5,"-inf","inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("\"nan\"").is_err());
    }
}
