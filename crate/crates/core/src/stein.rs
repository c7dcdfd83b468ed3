//! Composite hypothesis testing tables and the resource-theory layer:
//! global robustness, the test-and-prepare conversion map, its audit, and
//! conversion rate intervals.

use crate::tolerances::Tol;
use crate::aep::{regularized_estimate, RegularizedEstimate, AEP_DIM_CAP};
use crate::divergences::TestOperator;
use crate::error::{Error, Result};
use crate::hermitian::Hermitian;
use crate::random;
use crate::setdiv::{dhypo_sets, dmax_smoothed_sets, dmin_sets, petz_sets, sandwiched_sets, trace_distance_to_set};
use crate::sets::{SetFamily, StateSet};
use crate::value::Value;
use serde::Serialize;

pub use crate::setdiv::{global_robustness, Robustness};


#[derive(Clone, Debug, Serialize)]
pub struct SteinRow {
    pub n: usize,
    /// D_H,ε(A_n‖B_n)/n
    pub dh_per_n: Value,
    /// (D_Petz,α(A_n‖B_n) − α/(1−α) log 1/ε)/n at α = 1 − 1/√n
    /// (the min-relative entropy at n = 1).
    pub petz_floor: f64,
    /// (D̃_α′(A_n‖B_n) + α′/(α′−1) log 1/(1−ε))/n at α′ = 1 + 1/√n.
    pub sandwich_ceiling: f64,
    pub within: bool,
    pub heuristic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinTable {
    pub epsilon: f64,
    pub rows: Vec<SteinRow>,
    pub all_within: bool,
    /// ceiling − floor is nonincreasing in n.
    pub width_nonincreasing: bool,
}

impl SteinTable {
    /// CSV with columns n, dh_per_n, floor, ceiling.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(["n", "dh_per_n", "floor", "ceiling"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.dh_per_n.to_string(), fmt(r.petz_floor), fmt(r.sandwich_ceiling)]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("epsilon", eps, "must lie in (0,1)"));
    }
    Ok(())
}

fn check_cap(f: &SetFamily, n: usize) -> Result<()> {
    let dim = (f.local_dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > AEP_DIM_CAP as u128 {
        return Err(Error::ResourceLimit(format!("{n} copies of a {}-dimensional system exceed the cap of {AEP_DIM_CAP}", f.local_dim())));
    }
    Ok(())
}

/// Per-n hypothesis-testing exponents with their one-shot floor and
/// ceiling, n = 1..=n_max.
pub fn stein_table(a: &SetFamily, b: &SetFamily, eps: f64, n_max: usize) -> Result<SteinTable> {
    check_eps(eps)?;
    if n_max == 0 {
        return Err(Error::param("n_max", 0.0, "must be at least one"));
    }
    check_cap(a, n_max)?;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (an, bn) = (a.at(n)?, b.at(n)?);
        let nf = n as f64;
        let h = dhypo_sets(eps, &an, &bn)?;
        let alpha = 1.0 - 1.0 / nf.sqrt();
        let (floor_div, floor_h) = if n == 1 {
            let r = dmin_sets(&an, &bn)?;
            (r.value, r.heuristic)
        } else {
            let r = petz_sets(alpha, &an, &bn)?;
            (r.lower, r.heuristic || !r.converged)
        };
        let petz_floor = (floor_div.to_f64() - alpha / (1.0 - alpha) * (1.0 / eps).log2()) / nf;
        let ap = 1.0 + 1.0 / nf.sqrt();
        let c = sandwiched_sets(ap, &an, &bn)?;
        let sandwich_ceiling = (c.upper.to_f64() + ap / (ap - 1.0) * (1.0 / (1.0 - eps)).log2()) / nf;
        let dh_per_n = h.result.value.map(|v| v / nf);
        let x = dh_per_n.to_f64();
        let within = x >= petz_floor - Tol::Stein.get() && x <= sandwich_ceiling + Tol::Stein.get();
        rows.push(SteinRow {
            n,
            dh_per_n,
            petz_floor,
            sandwich_ceiling,
            within,
            heuristic: floor_h || c.heuristic || !c.converged || h.result.heuristic,
        });
    }
    let all_within = rows.iter().all(|r| r.within);
    let width_nonincreasing =
        rows.windows(2).all(|w| w[1].sandwich_ceiling - w[1].petz_floor <= w[0].sandwich_ceiling - w[0].petz_floor + Tol::Stein.get());
    Ok(SteinTable { epsilon: eps, rows, all_within, width_nonincreasing })
}

/// X ↦ tr[MX]·target + tr[(I−M)X]·free_target.
#[derive(Clone, Debug)]
pub struct ProtocolMap {
    pub test: TestOperator,
    pub target: Hermitian,
    pub free_target: Hermitian,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Composite type-II error of the test against F_n.
    pub beta: f64,
    /// D_max(target‖F_m) as computed by the smoothing program.
    pub target_dmax: Value,
}

impl ProtocolMap {
    pub fn apply(&self, x: &Hermitian) -> Result<Hermitian> {
        if x.dim() != self.test.m.dim() {
            return Err(Error::Dimension(format!("input of dimension {}, map expects {}", x.dim(), self.test.m.dim())));
        }
        let p = x.inner(&self.test.m);
        Ok(self.target.scale(p).add(&self.free_target.scale(x.trace() - p)))
    }

    /// Trace is preserved on the given states within the trace_preserving tolerance.
    pub fn is_trace_preserving(&self, states: &[Hermitian]) -> Result<bool> {
        for x in states {
            if (self.apply(x)?.trace() - x.trace()).abs() > Tol::TracePreserving.get() {
                return Ok(false);
            }
        }
        Ok((self.target.trace() - 1.0).abs() <= Tol::TracePreserving.get() && (self.free_target.trace() - 1.0).abs() <= Tol::TracePreserving.get())
    }
}

/// Maximally mixed state when it is free, else the first generator.
pub fn canonical_free_state(f: &StateSet) -> Result<Hermitian> {
    let mm = Hermitian::maximally_mixed(f.dims());
    if f.contains(&mm, Tol::Witness.get())? {
        return Ok(mm);
    }
    f.generators()
        .and_then(|g| g.into_iter().next())
        .ok_or_else(|| Error::Config("no canonical free state: the maximally mixed state is not free and the set has no generators".into()))
}

/// Test from the composite test of A_n against F_n at ε/2, target from the
/// ε/2-smoothed max-relative entropy of B_m against F_m.
pub fn build_rng_protocol(a: &SetFamily, f: &SetFamily, b: &SetFamily, n: usize, m: usize, eps: f64, delta: f64) -> Result<ProtocolMap> {
    check_eps(eps)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", delta, "must be nonnegative"));
    }
    let (an, fn_, bm, fm) = (a.at(n)?, f.at(n)?, b.at(m)?, f.at(m)?);
    let free_target = canonical_free_state(&fm)?;
    let h = dhypo_sets(eps / 2.0, &an, &fn_)?;
    let s = dmax_smoothed_sets(eps / 2.0, &bm, &fm)?;
    let target = s.sigma_prime.scale(1.0 / s.sigma_prime.trace());
    Ok(ProtocolMap { test: h.test, target, free_target, n, m, epsilon: eps, delta, beta: h.beta, target_dmax: s.value })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolAudit {
    /// sup over tested ρ ∈ A_n of inf over σ ∈ B_m of the trace distance.
    pub trans_error: f64,
    /// sup over tested ω ∈ F_n of R(Λ(ω)).
    pub rng_violation: Value,
    /// 2^{−nδ}
    pub delta_target: f64,
    pub tested_inputs: usize,
    pub tested_free: usize,
    /// Sups were sampled rather than taken over generators.
    pub heuristic: bool,
}

/// Members to test: generators when enumerable, else the interior point and
/// oracle witnesses of seeded random directions.
fn probe_members(s: &StateSet, budget: usize, rng: &mut random::SeededRng) -> Result<(Vec<Hermitian>, bool)> {
    if let Some(g) = s.generators() {
        return Ok((g, false));
    }
    let mut out = vec![s.interior_point()];
    for _ in 0..budget {
        let x = random::hermitian(s.dim(), rng);
        out.push(s.max_linear(&x)?.witness);
    }
    Ok((out, true))
}

/// Dirichlet mixtures of probe members.
fn mixtures(base: &[Hermitian], budget: usize, rng: &mut random::SeededRng) -> Vec<Hermitian> {
    let mut out = base.to_vec();
    for _ in 0..budget {
        let w = random::dirichlet(base.len(), rng);
        let mut acc = base[0].scale(w[0]);
        for (x, c) in base.iter().zip(&w).skip(1) {
            acc = acc.axpy(*c, x);
        }
        out.push(acc);
    }
    out
}

pub fn protocol_audit(p: &ProtocolMap, a: &SetFamily, b: &SetFamily, f: &SetFamily, sample_budget: usize, seed: u64) -> Result<ProtocolAudit> {
    let (an, bm, fn_, fm) = (a.at(p.n)?, b.at(p.m)?, f.at(p.n)?, f.at(p.m)?);
    let mut rng = random::rng(seed);
    let (inputs, h1) = probe_members(&an, sample_budget, &mut rng)?;
    let mut trans_error = 0.0f64;
    for rho in &inputs {
        let (d, _) = trace_distance_to_set(&p.apply(rho)?, &bm)?;
        trans_error = trans_error.max(d);
    }
    let (free, h2) = probe_members(&fn_, sample_budget, &mut rng)?;
    let free = if h2 { mixtures(&free, sample_budget, &mut rng) } else { free };
    let mut rng_violation = Value::Finite(0.0);
    for w in &free {
        let r = global_robustness(&p.apply(w)?, &fm)?.robustness;
        if r > rng_violation {
            rng_violation = r;
        }
    }
    Ok(ProtocolAudit {
        trans_error,
        rng_violation,
        delta_target: (-(p.n as f64) * p.delta).exp2(),
        tested_inputs: inputs.len(),
        tested_free: free.len(),
        heuristic: h1 || h2,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn of(e: &RegularizedEstimate) -> Self {
        Self { lo: e.best_lower.to_f64(), hi: e.best_upper.to_f64() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateBounds {
    /// D∞(A‖F_A)
    pub numerator: Interval,
    /// D∞(B‖F_B)
    pub denominator: Interval,
    pub rate_interval: Interval,
    /// rate(A→B)·rate(B→A), when the numerator is bounded away from 0.
    pub reversibility: Option<Interval>,
    pub heuristic: bool,
}

/// r(A→B) ∈ [num.lo/den.hi, num.hi/den.lo]. The free families are given
/// separately for source and target since their local dimensions may differ.
pub fn rate_bounds(a: &SetFamily, b: &SetFamily, fa: &SetFamily, fb: &SetFamily, m_max: usize) -> Result<RateBounds> {
    let ea = regularized_estimate(a, fa, m_max)?;
    let eb = regularized_estimate(b, fb, m_max)?;
    let (num, den) = (Interval::of(&ea), Interval::of(&eb));
    if !(den.lo > 0.0) {
        return Err(Error::Undefined(format!("the target's regularized divergence interval [{}, {}] touches zero", den.lo, den.hi)));
    }
    let rate = Interval { lo: num.lo.max(0.0) / den.hi, hi: num.hi / den.lo };
    let reversibility = (num.lo > 0.0).then(|| {
        let back = Interval { lo: den.lo / num.hi, hi: den.hi / num.lo };
        Interval { lo: rate.lo * back.lo, hi: rate.hi * back.hi }
    });
    Ok(RateBounds { numerator: num, denominator: den, rate_interval: rate, reversibility, heuristic: ea.heuristic || eb.heuristic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences;

    fn plus(d: usize) -> Hermitian {
        Hermitian::pure_real(&vec![1.0 / (d as f64).sqrt(); d])
    }

    #[test]
    fn robustness_of_coherence() {
        let f = StateSet::incoherent(vec![2]).unwrap();
        let r = global_robustness(&plus(2), &f).unwrap();
        assert!((r.robustness.unwrap() - 1.0).abs() < 1e-7);
        let r = global_robustness(&Hermitian::diag(&[0.3, 0.7]), &f).unwrap();
        assert!(r.robustness.unwrap() < 1e-7);
    }

    #[test]
    fn stein_equal_sets() {
        let mut rng = random::rng(1);
        let r = random::density(2, &mut rng);
        let a = SetFamily::Iid(StateSet::singleton(r).unwrap());
        let t = stein_table(&a, &a, 0.3, 2).unwrap();
        for row in &t.rows {
            let want = -(0.7f64).log2() / row.n as f64;
            assert!((row.dh_per_n.unwrap() - want).abs() < 1e-6, "{row:?}");
        }
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("n,dh_per_n,floor,ceiling\n"));
    }

    #[test]
    fn null_protocol() {
        let f = SetFamily::Iid(StateSet::incoherent(vec![2]).unwrap());
        let a = SetFamily::Iid(StateSet::singleton(Hermitian::diag(&[0.8, 0.2])).unwrap());
        let p = build_rng_protocol(&a, &f, &a, 1, 1, 0.2, 0.1).unwrap();
        assert!(p.is_trace_preserving(&[Hermitian::diag(&[0.5, 0.5]), plus(2)]).unwrap());
        let audit = protocol_audit(&p, &a, &a, &f, 4, 0).unwrap();
        assert!(audit.trans_error <= 0.2 + 5e-3, "{audit:?}");
        assert!(audit.rng_violation.unwrap() <= 5e-3, "{audit:?}");
        assert!(build_rng_protocol(&a, &f, &a, 1, 1, 1.0, 0.1).is_err());
    }

    #[test]
    fn rates_between_coherent_states() {
        let a = SetFamily::Iid(StateSet::singleton(plus(2)).unwrap());
        let b = SetFamily::Iid(StateSet::singleton(plus(3)).unwrap());
        let fa = SetFamily::Iid(StateSet::incoherent(vec![2]).unwrap());
        let fb = SetFamily::Iid(StateSet::incoherent(vec![3]).unwrap());
        let r = rate_bounds(&a, &b, &fa, &fb, 1).unwrap();
        assert!(r.rate_interval.contains(1.0 / 3f64.log2()), "{r:?}");
        assert!(r.reversibility.unwrap().contains(1.0));
        let same = rate_bounds(&a, &a, &fa, &fa, 1).unwrap();
        assert!(same.rate_interval.contains(1.0));
        let free = SetFamily::Iid(StateSet::singleton(Hermitian::diag(&[0.5, 0.5])).unwrap());
        assert!(matches!(rate_bounds(&a, &free, &fa, &fa, 1), Err(Error::Undefined(_))));
        let d = divergences::umegaki(&plus(2), &Hermitian::diag(&[0.5, 0.5])).unwrap().value.unwrap();
        assert!(r.numerator.contains(d));
    }
}
