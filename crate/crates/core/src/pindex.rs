use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Schatten index `p` in `[1, ∞]`.
///
/// On the wire a finite index is a JSON number and the operator-norm index is
/// the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SchattenIndex(f64);

impl SchattenIndex {
    pub const ONE: SchattenIndex = SchattenIndex(1.0);
    pub const TWO: SchattenIndex = SchattenIndex(2.0);
    pub const INFINITY: SchattenIndex = SchattenIndex(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Input(format!("Schatten index must lie in [1, inf], got {p}")));
        }
        Ok(SchattenIndex(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, zero for the operator norm.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// The index `r` with `1/r = 1/p + 1/q`. Fails when `1/p + 1/q > 1`.
    pub fn holder(self, other: SchattenIndex) -> Result<SchattenIndex> {
        let s = self.reciprocal() + other.reciprocal();
        if s > 1.0 + 1e-15 {
            return Err(Error::Input(format!("1/p + 1/q = {s} exceeds 1")));
        }
        if s == 0.0 {
            Ok(SchattenIndex::INFINITY)
        } else {
            Ok(SchattenIndex((1.0 / s).max(1.0)))
        }
    }
}

impl fmt::Display for SchattenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for SchattenIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("cannot parse Schatten index {s:?}")))?;
        SchattenIndex::new(v)
    }
}

impl Serialize for SchattenIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for SchattenIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let p = match Repr::deserialize(deserializer)? {
            Repr::Num(v) => SchattenIndex::new(v),
            Repr::Text(s) => s.parse(),
        };
        p.map_err(serde::de::Error::custom)
    }
}
