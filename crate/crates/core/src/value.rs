use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// A divergence value in bits. `Infinite` is a tag, so solvers never carry a
/// floating-point infinity around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(f64),
    Infinite,
}

impl Value {
    pub fn is_finite(self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinite => None,
        }
    }

    /// Panics on the infinite tag; use in tests and where finiteness was checked.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("divergence value is infinite")
    }

    /// Boundary conversion to a float (`f64::INFINITY` for the tag).
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Value {
        match self {
            Value::Finite(v) => Value::Finite(f(v)),
            Value::Infinite => Value::Infinite,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.partial_cmp(b),
            (Value::Infinite, Value::Infinite) => Some(Ordering::Equal),
            (Value::Infinite, _) => Some(Ordering::Greater),
            (_, Value::Infinite) => Some(Ordering::Less),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Finite(v) => s.serialize_f64(*v),
            Value::Infinite => s.serialize_str("inf"),
        }
    }
}
