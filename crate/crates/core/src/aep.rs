//! Finite-m bounds on the regularized relative entropy between set families,
//! the α-window bounds, and the second-order envelope.
//!
//! D∞(A‖B) is only ever reported as an interval
//! [max_m D_M(A_m‖B_m)/m, min_m D(A_m‖B_m)/m].

use crate::tolerances::Tol;
use crate::divergences;
use crate::error::{Error, Result};
use crate::hermitian::Hermitian;
use crate::setdiv::{d_sets, dm_alpha_sets, dm_sets, petz_sets, sandwiched_sets, SetDivergenceResult};
use crate::sets::{validate_assumptions, SetFamily, StateSet};
use crate::value::Value;
use serde::Serialize;

/// Largest matrix dimension d^m handled by the sandwich table
/// (d^{2m} ≤ 4096 matrix entries).
pub const AEP_DIM_CAP: usize = 64;
/// Samples per validator run inside the sandwich.
const VALIDATION_SAMPLES: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct AepBounds {
    pub m: usize,
    /// D_M(A_m‖B_m)/m
    pub lower: Value,
    /// D(A_m‖B_m)/m
    pub upper: Value,
    /// 2(d²+d) log(m+d)/m
    pub gap_guarantee: f64,
    pub heuristic: bool,
}

fn round_down(v: Value) -> Value {
    v.map(|x| x - Tol::Roundoff.get() * (1.0 + x.abs()))
}

fn round_up(v: Value) -> Value {
    v.map(|x| x + Tol::Roundoff.get() * (1.0 + x.abs()))
}

pub fn gap_guarantee(d: usize, m: usize) -> f64 {
    let d = d as f64;
    let m = m as f64;
    2.0 * (d * d + d) * (m + d).log2() / m
}

fn check_dim(a: &SetFamily, m: usize) -> Result<()> {
    let dim = (a.local_dim() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > AEP_DIM_CAP as u128 {
        return Err(Error::ResourceLimit(format!("{m} copies of a {}-dimensional system exceed the cap of {AEP_DIM_CAP}", a.local_dim())));
    }
    Ok(())
}

fn families_pass(a: &SetFamily, b: &SetFamily, m: usize) -> Result<bool> {
    if m < 2 {
        return Ok(true);
    }
    let (p, q) = (validate_assumptions(a, 1, m - 1, VALIDATION_SAMPLES, 0)?, validate_assumptions(b, 1, m - 1, VALIDATION_SAMPLES, 0)?);
    Ok(p.passed && q.passed)
}

fn per_copy(v: Value, m: usize) -> Value {
    v.map(|x| x / m as f64)
}

/// The two sides of the finite-m sandwich at one m.
pub fn aep_sandwich(a: &SetFamily, b: &SetFamily, m: usize) -> Result<AepBounds> {
    if m == 0 {
        return Err(Error::param("m", 0.0, "copy counts start at one"));
    }
    check_dim(a, m)?;
    let (am, bm) = (a.at(m)?, b.at(m)?);
    let lo = dm_sets(&am, &bm)?;
    let hi = d_sets(&am, &bm)?;
    let heuristic = lo.heuristic || hi.heuristic || !hi.converged || !families_pass(a, b, m)?;
    Ok(AepBounds {
        m,
        lower: round_down(per_copy(lo.lower, m)),
        upper: round_up(per_copy(hi.upper, m)),
        gap_guarantee: gap_guarantee(a.local_dim(), m),
        heuristic,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizedEstimate {
    pub best_lower: Value,
    pub best_upper: Value,
    pub rows: Vec<AepBounds>,
    /// Lower sequence nondecreasing in m (within the slack).
    pub lower_monotone: bool,
    pub heuristic: bool,
}

impl RegularizedEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.best_lower <= Value::Finite(x) && Value::Finite(x) <= self.best_upper
    }

    pub fn width(&self) -> f64 {
        match (self.best_lower, self.best_upper) {
            (Value::Finite(l), Value::Finite(u)) => u - l,
            _ => f64::INFINITY,
        }
    }
}

/// Sandwich rows for m = 1..=m_max and the best interval.
pub fn regularized_estimate(a: &SetFamily, b: &SetFamily, m_max: usize) -> Result<RegularizedEstimate> {
    if m_max == 0 {
        return Err(Error::param("m_max", 0.0, "must be at least one"));
    }
    check_dim(a, m_max)?;
    let mut rows = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        rows.push(aep_sandwich(a, b, m)?);
    }
    let best_lower = rows.iter().map(|r| r.lower).fold(Value::Finite(f64::NEG_INFINITY), |x, y| if y > x { y } else { x });
    let best_upper = rows.iter().map(|r| r.upper).fold(Value::Infinite, |x, y| if y < x { y } else { x });
    let lower_monotone = rows.windows(2).all(|w| match (w[0].lower, w[1].lower) {
        (Value::Finite(x), Value::Finite(y)) => y >= x - Tol::Aep.get(),
        (Value::Infinite, Value::Finite(_)) => false,
        _ => true,
    });
    let heuristic = rows.iter().any(|r| r.heuristic);
    Ok(RegularizedEstimate { best_lower, best_upper, rows, lower_monotone, heuristic })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnvelopeParams {
    pub c: f64,
    /// Constant multiplying f(n, ε); supplied by the caller.
    pub c_prime: f64,
    pub d: usize,
    pub epsilon: f64,
}

impl EnvelopeParams {
    pub fn new(c: f64, c_prime: f64, d: usize, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("C", c, "must be positive"));
        }
        if !(c_prime >= 0.0 && c_prime.is_finite()) {
            return Err(Error::param("C'", c_prime, "must be nonnegative"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", epsilon, "must lie in (0,1)"));
        }
        Ok(Self { c, c_prime, d, epsilon })
    }
}

/// f(n, ε) = n^{2/3} log n (log 1/ε)^{1/3}, logs base two.
pub fn envelope_f(n: usize, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", n as f64, "must be at least 2"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("epsilon", eps, "must lie in (0,1]"));
    }
    let n = n as f64;
    Ok(n.powf(2.0 / 3.0) * n.log2() * (1.0 / eps).log2().cbrt())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Envelope {
    pub n: usize,
    /// Range for D_H,ε(A_n‖B_n).
    pub dh_lower: f64,
    pub dh_upper: f64,
    /// Range for D_max,ε(A_n‖B_n).
    pub dmax_lower: f64,
    pub dmax_upper: f64,
}

/// nD∞ ± C′f envelopes from the endpoints of a D∞ interval. Shape tools
/// only: C′ is a caller-supplied constant.
pub fn envelope_bounds(p: &EnvelopeParams, n: usize, d_inf: (f64, f64)) -> Result<Envelope> {
    let e = p.epsilon;
    let nf = n as f64;
    let (lo, hi) = (nf * d_inf.0, nf * d_inf.1);
    let f_e = envelope_f(n, e)?;
    let f_1e = envelope_f(n, 1.0 - e)?;
    let dmax_lower = if 1.0 - 2.0 * e > 0.0 {
        lo - p.c_prime * envelope_f(n, 1.0 - 2.0 * e)? - (1.0 / e).log2()
    } else {
        f64::NEG_INFINITY
    };
    Ok(Envelope {
        n,
        dh_lower: lo - p.c_prime * f_e,
        dh_upper: hi + p.c_prime * f_1e,
        dmax_lower,
        dmax_upper: hi + p.c_prime * f_e + (2.0 / (e * e)).log2(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StarViolation {
    pub alpha: Option<f64>,
    pub what: String,
    pub value: Value,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    pub m: usize,
    pub c: f64,
    pub passed: bool,
    pub violations: Vec<StarViolation>,
    #[serde(skip)]
    pub witnesses: Vec<(f64, Hermitian, Hermitian)>,
}

/// Grid of α over [1/2, 1] used by the (*) check.
pub fn star_alphas() -> Vec<f64> {
    (0..9).map(|k| 0.5 + k as f64 / 16.0).collect()
}

/// Checks D_Petz,3/2 ≤ Cm/4 at the minimizing pairs of D_Petz,α over the α
/// grid, and log tr σ ≤ Cm/4 on sampled members of B_m.
pub fn assumption_star_check(a: &SetFamily, b: &SetFamily, m: usize, c: f64) -> Result<StarReport> {
    if !(c > 0.0) {
        return Err(Error::param("C", c, "must be positive"));
    }
    let (am, bm) = (a.at(m)?, b.at(m)?);
    let bound = c * m as f64 / 4.0;
    let mut violations = Vec::new();
    let mut witnesses = Vec::new();
    for alpha in star_alphas() {
        let r: SetDivergenceResult = if alpha == 1.0 { d_sets(&am, &bm)? } else { petz_sets(alpha, &am, &bm)? };
        let p = divergences::petz(1.5, &r.rho_witness, &r.sigma_witness)?.value;
        if p > Value::Finite(bound) {
            violations.push(StarViolation { alpha: Some(alpha), what: "petz(3/2) at the minimizing pair".into(), value: p, bound });
        }
        witnesses.push((alpha, r.rho_witness, r.sigma_witness));
    }
    let mut sigmas = bm.generators().unwrap_or_default();
    sigmas.push(bm.interior_point());
    sigmas.push(bm.max_linear(&Hermitian::identity(bm.dims()))?.witness);
    for s in sigmas {
        let t = s.trace();
        let v = if t > 0.0 { Value::Finite(t.log2()) } else { Value::Finite(f64::NEG_INFINITY) };
        if v > Value::Finite(bound) {
            violations.push(StarViolation { alpha: None, what: "log trace of a member of B".into(), value: v, bound });
        }
    }
    Ok(StarReport { m, c, passed: violations.is_empty(), violations, witnesses })
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub m: usize,
    pub alpha: f64,
    pub c: f64,
    /// (1/m) D_{M,α} below the window or (1/m) D̃_α above it.
    pub divergence_per_copy: Value,
    pub d_inf_lower: Value,
    pub d_inf_upper: Value,
    /// Right-hand side of the window inequality.
    pub bound: f64,
    /// Smallest and largest values of the bracketed quantity consistent
    /// with the D∞ interval.
    pub quantity_min: f64,
    pub quantity_max: f64,
    pub passed: bool,
}

/// Both sides of the α-window inequalities, checked against the certified
/// interval for D∞. Refuses when (*) fails for the given C.
pub fn window_bounds(a: &SetFamily, b: &SetFamily, m: usize, alpha: f64, c: f64) -> Result<WindowReport> {
    if m < 2 {
        return Err(Error::param("m", m as f64, "must be at least 2"));
    }
    if !(c > 0.0) {
        return Err(Error::param("C", c, "must be positive"));
    }
    let w = 1.0 / ((2.0 + c) * m as f64);
    let below = alpha > 1.0 - w && alpha < 1.0;
    let above = alpha > 1.0 && alpha < 1.0 + w;
    if !(below || above) {
        return Err(Error::param("alpha", alpha, "outside the window around 1"));
    }
    let star = assumption_star_check(a, b, m, c)?;
    if !star.passed {
        return Err(Error::Config(format!("assumption (*) fails for C = {c}: {}", star.violations[0].what)));
    }
    let est = regularized_estimate(a, b, m)?;
    let (am, bm) = (a.at(m)?, b.at(m)?);
    let div = if below { dm_alpha_sets(alpha, &am, &bm)? } else { sandwiched_sets(alpha, &am, &bm)? };
    let v = if below { div.lower } else { div.upper };
    let v = per_copy(v, m);
    let d = a.local_dim() as f64;
    let mf = m as f64;
    let bound = (1.0 - alpha).abs() * (2.0 + c).powi(2) * mf + 2.0 * (d * d + d) * (mf + d).log2() / mf;
    let (lo, hi) = (est.best_lower.to_f64(), est.best_upper.to_f64());
    let x = v.to_f64();
    // below: D∞ − v ; above: v − D∞
    let (qmin, qmax) = if below { (lo - x, hi - x) } else { (x - hi, x - lo) };
    let passed = qmax >= -Tol::Aep.get() && qmin <= bound + Tol::Aep.get();
    Ok(WindowReport {
        m,
        alpha,
        c,
        divergence_per_copy: v,
        d_inf_lower: est.best_lower,
        d_inf_upper: est.best_upper,
        bound,
        quantity_min: qmin,
        quantity_max: qmax,
        passed,
    })
}

/// The canonical instance the window examples use: both families
/// i.i.d. singletons.
pub fn iid_pair(rho: &Hermitian, sigma: &Hermitian) -> Result<(SetFamily, SetFamily)> {
    Ok((SetFamily::Iid(StateSet::singleton(rho.clone())?), SetFamily::Iid(StateSet::singleton(sigma.clone())?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn envelope_values() {
        assert!((envelope_f(8, 0.5).unwrap() - 12.0).abs() < 1e-12);
        assert!(envelope_f(1, 0.5).is_err());
        assert!(envelope_f(8, 1.0).unwrap().abs() < 1e-12);
        assert!(envelope_f(9, 0.5).unwrap() > envelope_f(8, 0.5).unwrap());
        assert!(envelope_f(8, 0.4).unwrap() > envelope_f(8, 0.5).unwrap());
        assert!(envelope_f(1_000_000, 0.1).unwrap() / 1e6 < envelope_f(1000, 0.1).unwrap() / 1e3);
    }

    #[test]
    fn singleton_sandwich() {
        let mut rng = random::rng(21);
        let (r, s) = (random::density(2, &mut rng), random::density(2, &mut rng));
        let (a, b) = iid_pair(&r, &s).unwrap();
        let d = divergences::umegaki(&r, &s).unwrap().value.unwrap();
        let est = regularized_estimate(&a, &b, 2).unwrap();
        for row in &est.rows {
            assert!((row.upper.unwrap() - d).abs() < 1e-6);
            assert!(row.lower.unwrap() <= row.upper.unwrap());
        }
        assert!(est.lower_monotone);
        assert!(est.contains(d));
        let eq = regularized_estimate(&a, &a, 1).unwrap();
        assert!(eq.best_upper.unwrap().abs() < 1e-9 && eq.best_lower.unwrap().abs() < 1e-9);
    }

    #[test]
    fn star_and_window() {
        let mut rng = random::rng(2);
        let r = random::density_bounded(2, 0.1, &mut rng);
        let s = random::density_bounded(2, 0.1, &mut rng);
        let (a, b) = iid_pair(&r, &s).unwrap();
        let p = divergences::petz(1.5, &r, &s).unwrap().value.unwrap();
        let m = 2;
        let c = 4.0 * (2.0 * p).max(0.0) / m as f64 + 1.0;
        assert!(assumption_star_check(&a, &b, m, c).unwrap().passed);
        let w = 1.0 / ((2.0 + c) * m as f64);
        let rep = window_bounds(&a, &b, m, 1.0 - w / 2.0, c).unwrap();
        assert!(rep.passed, "{rep:?}");
        let rep = window_bounds(&a, &b, m, 1.0 + w / 2.0, c).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(window_bounds(&a, &b, m, 0.5, c).is_err());
        assert!(window_bounds(&a, &b, m, 1.0 - w / 2.0, 1e-6).is_err());
        let bad = SetFamily::Iid(StateSet::singleton(Hermitian::diag(&[1.0, 0.0])).unwrap());
        assert!(!assumption_star_check(&a, &bad, 1, 10.0).unwrap().passed);
    }
}
