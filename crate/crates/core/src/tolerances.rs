//! Named tolerances. Every numerical threshold that decides an outcome is
//! listed here with its default; a front end may override them once per
//! process with [`install`].

use crate::error::{Error, Result};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tol {
    SupportFloor,
    PsdFloor,
    Hermitian,
    Witness,
    Assumption,
    Gap,
    Additivity,
    Aep,
    Stein,
    TracePreserving,
    Stationarity,
    Roundoff,
}

pub struct Entry {
    pub tol: Tol,
    pub name: &'static str,
    pub default: f64,
    pub meaning: &'static str,
}

pub const TABLE: &[Entry] = &[
    Entry { tol: Tol::SupportFloor, name: "support_floor", default: 1e-10, meaning: "relative eigenvalue floor defining numerical support" },
    Entry { tol: Tol::PsdFloor, name: "psd_floor", default: 1e-10, meaning: "negative eigenvalues above -floor are clipped when validating states" },
    Entry { tol: Tol::Hermitian, name: "hermitian", default: 1e-8, meaning: "largest accepted |X - X^dagger| entry in input operators" },
    Entry { tol: Tol::Witness, name: "witness", default: 1e-6, meaning: "membership tolerance for oracle witnesses" },
    Entry { tol: Tol::Assumption, name: "assumption", default: 1e-7, meaning: "relative tolerance of the family validator" },
    Entry { tol: Tol::Gap, name: "gap", default: 1e-4, meaning: "duality gap below which a set solve counts as converged" },
    Entry { tol: Tol::Additivity, name: "additivity", default: 5e-5, meaning: "slack of the super- and subadditivity harnesses" },
    Entry { tol: Tol::Aep, name: "aep", default: 1e-4, meaning: "slack of the AEP gap and monotonicity checks" },
    Entry { tol: Tol::Stein, name: "stein", default: 1e-4, meaning: "slack of the Stein-table floor/ceiling checks" },
    Entry { tol: Tol::TracePreserving, name: "trace_preserving", default: 1e-9, meaning: "trace-preservation check of conversion maps" },
    Entry { tol: Tol::Stationarity, name: "stationarity", default: 1e-7, meaning: "gradient norm at which the measured-divergence solvers stop" },
    Entry { tol: Tol::Roundoff, name: "roundoff", default: 1e-12, meaning: "outward padding of reported intervals" },
];

static OVERRIDES: OnceLock<Vec<f64>> = OnceLock::new();

impl Tol {
    pub fn get(self) -> f64 {
        let i = self as usize;
        match OVERRIDES.get() {
            Some(v) => v[i],
            None => TABLE[i].default,
        }
    }

    pub fn name(self) -> &'static str {
        TABLE[self as usize].name
    }
}

pub fn lookup(name: &str) -> Option<Tol> {
    TABLE.iter().find(|e| e.name == name).map(|e| e.tol)
}

/// Parses `name=value`.
pub fn parse_override(s: &str) -> Result<(Tol, f64)> {
    let (name, value) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected name=value, got `{s}`")))?;
    let tol = lookup(name.trim()).ok_or_else(|| Error::Config(format!("unknown tolerance `{}`", name.trim())))?;
    let v: f64 = value.trim().parse().map_err(|_| Error::Config(format!("tolerance `{name}`: `{value}` is not a number")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!("tolerance `{name}` must be positive and finite")));
    }
    Ok((tol, v))
}

/// Fixes the tolerances for the rest of the process. Fails if called twice.
pub fn install(overrides: &[(Tol, f64)]) -> Result<()> {
    let mut v: Vec<f64> = TABLE.iter().map(|e| e.default).collect();
    for &(t, x) in overrides {
        v[t as usize] = x;
    }
    OVERRIDES.set(v).map_err(|_| Error::Config("tolerances were already installed".into()))
}

/// Current values in table order.
pub fn current() -> Vec<(&'static str, f64)> {
    TABLE.iter().map(|e| (e.name, e.tol.get())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_indexed_by_variant() {
        for (i, e) in TABLE.iter().enumerate() {
            assert_eq!(e.tol as usize, i);
        }
        assert_eq!(parse_override("gap=1e-3").unwrap(), (Tol::Gap, 1e-3));
        assert!(parse_override("gap=-1").is_err());
        assert!(parse_override("nope=1").is_err());
        assert!(parse_override("gap").is_err());
    }
}
