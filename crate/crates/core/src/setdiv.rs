//! Divergences between two state sets, D(A‖B) = inf over ρ ∈ A, σ ∈ B of
//! D(ρ‖σ), for the Umegaki, measured, measured Rényi, Petz, sandwiched,
//! max- and hypothesis-testing divergences.
//!
//! Measured divergences are computed from their dual programs over a single
//! Hermitian variable S (ω = e^S), with the set support functions smoothed by
//! log-sum-exp so that quasi-Newton steps apply. Every dual point evaluated
//! with the exact support functions is a certified lower bound; the primal
//! value at the smoothed maximizers gives the upper bound.
//!
//! The max- and hypothesis-testing divergences are semidefinite programs over
//! conic descriptions of the sets and are solved directly.

use crate::tolerances::Tol;
use crate::divergences::{self, support_contained, TestOperator};
use crate::error::{Error, Result};
use crate::hermitian::{CMat, Hermitian, Scalar, Spectral, C64};
use crate::measured::{self, exp_term, Regime, ALPHA_CAP, MEASURED_CAP_BITS};
use crate::optim::barrier::{hermitian_coords, LinIneq, Lmi, Model, SdpOptions};
use crate::optim::frank_wolfe::{self, Evaluation, FwOptions, LinearOracle, Objective};
use crate::optim::lbfgs::{self, LbfgsOptions};
use crate::optim::{herm_from_vec, herm_to_vec};
use crate::sets::{Kind, SetFamily, StateSet};
use crate::value::Value;
use serde::Serialize;
use std::f64::consts::LN_2;


const SMOOTHING: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

#[derive(Clone, Debug, Serialize)]
pub struct SetDivergenceResult {
    /// Reported value: a certified lower bound for the dual-based solvers,
    /// the primal value for the conditional-gradient ones.
    pub value: Value,
    pub lower: Value,
    pub upper: Value,
    #[serde(skip)]
    pub rho_witness: Hermitian,
    #[serde(skip)]
    pub sigma_witness: Hermitian,
    /// Dual operator (ω or W) when the solver has one.
    #[serde(skip)]
    pub dual_witness: Option<Hermitian>,
    /// upper − lower, in bits.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when part of the result rests on a non-certified step.
    pub heuristic: bool,
}

fn neg_inf() -> Value {
    Value::Finite(f64::NEG_INFINITY)
}

fn gap_of(lower: Value, upper: Value) -> f64 {
    match (lower, upper) {
        (Value::Finite(l), Value::Finite(u)) => (u - l).max(0.0),
        (Value::Infinite, Value::Infinite) => 0.0,
        (Value::Infinite, Value::Finite(_)) => 0.0,
        (Value::Finite(_), Value::Infinite) => f64::INFINITY,
    }
}

impl SetDivergenceResult {
    fn exact(value: Value, rho: Hermitian, sigma: Hermitian) -> Self {
        Self {
            value,
            lower: value,
            upper: value,
            rho_witness: rho,
            sigma_witness: sigma,
            dual_witness: None,
            gap: 0.0,
            iterations: 0,
            converged: true,
            heuristic: false,
        }
    }

    fn bounded(value: Value, lower: Value, upper: Value, rho: Hermitian, sigma: Hermitian) -> Self {
        let gap = gap_of(lower, upper);
        Self {
            value,
            lower,
            upper,
            rho_witness: rho,
            sigma_witness: sigma,
            dual_witness: None,
            gap,
            iterations: 0,
            converged: gap <= Tol::Gap.get(),
            heuristic: false,
        }
    }
}

fn check_sets(a: &StateSet, b: &StateSet) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::Dimension(format!("sets act on {:?} and {:?}", a.dims(), b.dims())));
    }
    Ok(())
}

fn singletons<'s>(a: &'s StateSet, b: &'s StateSet) -> Option<(&'s Hermitian, &'s Hermitian)> {
    match (a.kind(), b.kind()) {
        (Kind::Singleton(r), Kind::Singleton(s)) => Some((r, s)),
        _ => None,
    }
}

fn lbfgs_options() -> LbfgsOptions {
    LbfgsOptions { grad_tol: 1e-9, max_iter: 3000, memory: 20, lower_cap: -MEASURED_CAP_BITS * LN_2 }
}

/// h(Y) smoothed, or its reverse h̲(Y) = −h(−Y); returns the value and the
/// maximizing (minimizing) member, which is also the gradient.
fn smoothed(set: &StateSet, y: &Hermitian, mu: f64, reverse: bool) -> Result<(f64, Hermitian)> {
    let arg = if reverse { y.scale(-1.0) } else { y.clone() };
    let (v, w) = set.smoothed_max_linear(&arg, mu)?.expect("smooth kind");
    Ok((if reverse { -v } else { v }, w))
}

fn exact(set: &StateSet, y: &Hermitian, reverse: bool) -> Result<(f64, Hermitian, bool)> {
    let s = if reverse { set.min_linear(y)? } else { set.max_linear(y)? };
    Ok((s.value, s.witness, s.exact))
}

// ---------------------------------------------------------------------------
// measured relative entropy

/// D_M(A‖B) = sup over S of h̲_A(S) + 1 − h_B(e^S).
pub fn dm_sets(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        let m = measured::dm(r, s)?;
        let mut out = SetDivergenceResult::exact(m.value, r.clone(), s.clone());
        out.dual_witness = Some(m.witness);
        out.iterations = m.iterations;
        out.converged = m.converged;
        return Ok(out);
    }
    if a.has_smooth_support() && b.has_smooth_support() {
        dm_dual(a, b)
    } else {
        dm_primal(a, b)
    }
}

/// Exact dual value at S and at the rescaled point S − log h_B(e^S)·I; the
/// better of the two with its ω.
fn dm_dual_exact(a: &StateSet, b: &StateSet, s: &Hermitian) -> Result<(f64, Hermitian, bool)> {
    let sp = s.eig()?;
    let omega = sp.map(f64::exp);
    let (la, _, ea) = exact(a, s, true)?;
    let (hb, _, eb) = exact(b, &omega, false)?;
    let mut best = (la + 1.0 - hb, omega.clone());
    if hb > 0.0 {
        let shift = hb.ln();
        let s2 = s.sub(&Hermitian::identity(s.dims()).scale(shift));
        let (la2, _, _) = exact(a, &s2, true)?;
        if la2 > best.0 {
            best = (la2, omega.scale(1.0 / hb));
        }
    }
    Ok((best.0, best.1, ea && eb))
}

fn dm_dual(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    let dims = a.dims().to_vec();
    let n = a.dim();
    let mut x = vec![0.0; n * n];
    let (mut best, mut best_omega, mut certified) = dm_dual_exact(a, b, &herm_from_vec(&x, &dims))?;
    let mut iterations = 0;
    let mut unbounded = false;
    let mut members = (a.interior_point(), b.interior_point());
    for &mu in &SMOOTHING {
        // minimize −φ_μ
        let f = |v: &[f64]| -> (f64, Vec<f64>) {
            let s = herm_from_vec(v, &dims);
            let Ok(sp) = s.eig() else { return (f64::NAN, vec![0.0; v.len()]) };
            let omega = sp.map(f64::exp);
            let (Ok((la, rho)), Ok((hb, sig))) = (smoothed(a, &s, mu, true), smoothed(b, &omega, mu, false)) else {
                return (f64::NAN, vec![0.0; v.len()]);
            };
            let g = sp.frechet(Scalar::Exp, &sig).sub(&rho);
            (-(la + 1.0 - hb), herm_to_vec(&g))
        };
        let res = lbfgs::minimize(x.clone(), f, lbfgs_options());
        iterations += res.iterations;
        if res.unbounded {
            unbounded = true;
            break;
        }
        x = res.x;
        let s = herm_from_vec(&x, &dims);
        let (v, om, ex) = dm_dual_exact(a, b, &s)?;
        if v > best {
            best = v;
            best_omega = om;
            certified = ex;
        }
        let omega = s.eig()?.map(f64::exp);
        members = (smoothed(a, &s, mu, true)?.1, smoothed(b, &omega, mu, false)?.1);
    }
    let (rho, sigma) = members;
    if unbounded {
        let mut out = SetDivergenceResult::exact(Value::Infinite, rho, sigma);
        out.iterations = iterations;
        return Ok(out);
    }
    let primal = measured::dm(&rho, &sigma)?;
    let lower = Value::Finite(best / LN_2);
    let mut out = SetDivergenceResult::bounded(lower, lower, primal.value, rho, sigma);
    out.dual_witness = Some(best_omega);
    out.iterations = iterations + primal.iterations;
    out.heuristic = !certified;
    Ok(out)
}

/// Pair objective for the conditional-gradient solvers.
struct PairObjective<F, D> {
    f: F,
    dual: D,
}

impl<F, D> Objective for PairObjective<F, D>
where
    F: FnMut(&Hermitian, &Hermitian, &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)>,
    D: FnMut(&Hermitian, &Hermitian) -> Result<Option<f64>>,
{
    fn eval(&mut self, x: &[Hermitian], need: &[bool]) -> Result<Evaluation> {
        let (value, g1, g2) = (self.f)(&x[0], &x[1], need)?;
        Ok(Evaluation { value, grads: vec![g1, g2] })
    }

    fn dual_bound(&mut self, x: &[Hermitian], _ev: &Evaluation) -> Result<Option<f64>> {
        (self.dual)(&x[0], &x[1])
    }
}

fn fw_pair(
    a: &StateSet,
    b: &StateSet,
    f: impl FnMut(&Hermitian, &Hermitian, &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)>,
    dual: impl FnMut(&Hermitian, &Hermitian) -> Result<Option<f64>>,
    opts: FwOptions,
) -> Result<frank_wolfe::FwResult> {
    let mut obj = PairObjective { f, dual };
    let oracles: [&dyn LinearOracle; 2] = [a, b];
    frank_wolfe::minimize(&mut obj, &oracles, vec![a.interior_point(), b.interior_point()], opts)
}

/// Conditional gradients on the primal D_M(ρ‖σ), for kinds whose support
/// function has no closed form. Gradients come from the optimal ω.
fn dm_primal(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    let last_omega = std::cell::RefCell::new(None::<Hermitian>);
    let f = |rho: &Hermitian, sigma: &Hermitian, _: &[bool]| -> Result<(Option<f64>, Hermitian, Hermitian)> {
        let r = measured::dm(rho, sigma)?;
        let Value::Finite(v) = r.value else {
            return Ok((None, rho.clone(), sigma.clone()));
        };
        let ln_omega = r.witness.eig()?.map(|x| x.max(1e-300).ln());
        *last_omega.borrow_mut() = Some(r.witness.clone());
        Ok((Some(v * LN_2), ln_omega, r.witness.scale(-1.0)))
    };
    let dual = |_: &Hermitian, _: &Hermitian| -> Result<Option<f64>> {
        let Some(omega) = last_omega.borrow().clone() else { return Ok(None) };
        let s = omega.eig()?.map(|x| x.max(1e-300).ln());
        Ok(Some(dm_dual_exact(a, b, &s)?.0))
    };
    let res = fw_pair(a, b, f, dual, FwOptions { tol: 1e-7, max_iter: 200, max_line: 20 })?;
    let upper = res.value.map_or(Value::Infinite, |v| Value::Finite(v / LN_2));
    let lower = if res.lower_bound.is_finite() { Value::Finite(res.lower_bound / LN_2) } else { neg_inf() };
    let mut out = SetDivergenceResult::bounded(lower, lower, upper, res.x[0].clone(), res.x[1].clone());
    out.dual_witness = last_omega.into_inner();
    out.iterations = res.iterations;
    out.heuristic = !out.converged;
    Ok(out)
}

// ---------------------------------------------------------------------------
// measured Rényi divergences

/// Exact Q at W = e^S for the regime program: α h_A(W^{p_ρ}) + (1−α) h_B(W^{p_σ})
/// for α < 1, α h̲_A(W^{p_ρ}) + (1−α) h_B(W) for α > 1.
fn renyi_dual_exact(alpha: f64, a: &StateSet, b: &StateSet, sp: &Spectral) -> Result<(f64, bool)> {
    let (pr, ps) = Regime::of(alpha)?.exponents(alpha);
    let high = alpha > 1.0;
    let (ha, _, ea) = exact(a, &sp.scaled(pr).map(f64::exp), high)?;
    let (hb, _, eb) = exact(b, &sp.scaled(ps).map(f64::exp), false)?;
    Ok((alpha * ha + (1.0 - alpha) * hb, ea && eb))
}

fn renyi_value(alpha: f64, q: f64) -> Value {
    if q <= 0.0 {
        // α < 1: Q → 0 means orthogonal sets; α > 1: no information
        return if alpha < 1.0 { Value::Infinite } else { neg_inf() };
    }
    let v = q.log2() / (alpha - 1.0);
    if v > MEASURED_CAP_BITS {
        Value::Infinite
    } else {
        Value::Finite(v)
    }
}

/// D_{M,α}(A‖B) through the regime's dual program over W = e^S.
pub fn dm_alpha_sets(alpha: f64, a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    let regime = Regime::of(alpha)?;
    if alpha > ALPHA_CAP {
        return Err(Error::param("alpha", alpha, "above the cap of 50; use max-relative entropy bounds"));
    }
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        let m = measured::dm_alpha(alpha, r, s)?;
        let mut out = SetDivergenceResult::exact(m.value, r.clone(), s.clone());
        out.dual_witness = Some(m.witness);
        out.iterations = m.iterations;
        out.converged = m.converged;
        return Ok(out);
    }
    if !(a.has_smooth_support() && b.has_smooth_support()) {
        return dm_alpha_primal(alpha, a, b);
    }
    let (pr, ps) = regime.exponents(alpha);
    let high = regime == Regime::High;
    let sign = if high { -1.0 } else { 1.0 };
    let dims = a.dims().to_vec();
    let n = a.dim();
    let mut x = vec![0.0; n * n];
    let zero = herm_from_vec(&x, &dims).eig()?;
    let (mut best_q, mut certified) = renyi_dual_exact(alpha, a, b, &zero)?;
    let mut best_x = x.clone();
    let mut iterations = 0;
    let mut members = (a.interior_point(), b.interior_point());
    let mut opts = lbfgs_options();
    opts.lower_cap = f64::NEG_INFINITY;
    for &mu in &SMOOTHING {
        let f = |v: &[f64]| -> (f64, Vec<f64>) {
            let s = herm_from_vec(v, &dims);
            let Ok(sp) = s.eig() else { return (f64::NAN, vec![0.0; v.len()]) };
            let wa = sp.scaled(pr).map(f64::exp);
            let wb = sp.scaled(ps).map(f64::exp);
            let (Ok((ha, rho)), Ok((hb, sig))) = (smoothed(a, &wa, mu, high), smoothed(b, &wb, mu, false)) else {
                return (f64::NAN, vec![0.0; v.len()]);
            };
            let ga = exp_term(&sp, pr, &rho).1;
            let gb = exp_term(&sp, ps, &sig).1;
            let q = alpha * ha + (1.0 - alpha) * hb;
            let g = ga.scale(alpha).add(&gb.scale(1.0 - alpha));
            (sign * q, herm_to_vec(&g.scale(sign)))
        };
        let res = lbfgs::minimize(x.clone(), f, opts);
        iterations += res.iterations;
        if !res.value.is_finite() {
            break;
        }
        x = res.x;
        let sp = herm_from_vec(&x, &dims).eig()?;
        let (q, ex) = renyi_dual_exact(alpha, a, b, &sp)?;
        if sign * q < sign * best_q {
            best_q = q;
            best_x = x.clone();
            certified = ex;
        }
        members = (smoothed(a, &sp.scaled(pr).map(f64::exp), mu, high)?.1, smoothed(b, &sp.scaled(ps).map(f64::exp), mu, false)?.1);
    }
    let (rho, sigma) = members;
    let lower = renyi_value(alpha, best_q);
    let primal = measured::dm_alpha(alpha, &rho, &sigma)?;
    let mut out = SetDivergenceResult::bounded(lower, lower, primal.value, rho, sigma);
    out.dual_witness = Some(herm_from_vec(&best_x, &dims).eig()?.map(f64::exp));
    out.iterations = iterations + primal.iterations;
    out.heuristic = !certified;
    Ok(out)
}

/// Conditional gradients on ∓Q(ρ,σ) with gradients from the optimal W.
fn dm_alpha_primal(alpha: f64, a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    let (pr, ps) = Regime::of(alpha)?.exponents(alpha);
    let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
    let last_w = std::cell::RefCell::new(None::<Hermitian>);
    let f = |rho: &Hermitian, sigma: &Hermitian, _: &[bool]| -> Result<(Option<f64>, Hermitian, Hermitian)> {
        let r = measured::dm_alpha(alpha, rho, sigma)?;
        let Value::Finite(v) = r.value else {
            return Ok((None, rho.clone(), sigma.clone()));
        };
        let q = (v * (alpha - 1.0)).exp2();
        let sp = r.witness.eig()?;
        let pow = |p: f64| sp.map(|x| if x > 0.0 { x.powf(p) } else { 0.0 });
        *last_w.borrow_mut() = Some(r.witness.clone());
        Ok((Some(sign * q), pow(pr).scale(sign * alpha), pow(ps).scale(sign * (1.0 - alpha))))
    };
    let dual = |_: &Hermitian, _: &Hermitian| -> Result<Option<f64>> {
        let Some(w) = last_w.borrow().clone() else { return Ok(None) };
        let sp = w.eig()?;
        if sp.values[0] <= 0.0 {
            return Ok(None);
        }
        let s = sp.map(f64::ln).eig()?;
        Ok(Some(sign * renyi_dual_exact(alpha, a, b, &s)?.0))
    };
    let res = fw_pair(a, b, f, dual, FwOptions { tol: 1e-8, max_iter: 200, max_line: 20 })?;
    let upper = res.value.map_or(Value::Infinite, |v| renyi_value(alpha, sign * v));
    let lower = if res.lower_bound.is_finite() { renyi_value(alpha, sign * res.lower_bound) } else { neg_inf() };
    let mut out = SetDivergenceResult::bounded(lower, lower, upper, res.x[0].clone(), res.x[1].clone());
    out.dual_witness = last_w.into_inner();
    out.iterations = res.iterations;
    out.heuristic = !out.converged;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Umegaki, Petz and sandwiched by conditional gradients

/// Eigenvalues raised to at least `floor` relative to the largest.
fn clipped(sp: &Spectral) -> Spectral {
    let fl = sp.max_abs() * 1e-14;
    let mut out = sp.clone();
    for v in out.values.iter_mut() {
        *v = v.max(fl.max(f64::MIN_POSITIVE));
    }
    out
}

/// D(ρ‖σ) in nats with gradients ln ρ + I − ln σ and −Dln_σ[ρ].
fn umegaki_grad(rho: &Hermitian, sigma: &Hermitian, need: &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)> {
    let ss = sigma.eig()?;
    if !support_contained(rho, &ss) {
        return Ok((None, rho.clone(), sigma.clone()));
    }
    let sr = rho.eig()?;
    let ln_s = clipped(&ss).map(f64::ln);
    let neg_ent: f64 = sr.values.iter().filter(|&&v| v > sr.floor()).map(|v| v * v.ln()).sum();
    let value = neg_ent - rho.inner(&ln_s);
    let g_rho = if need[0] {
        clipped(&sr).map(f64::ln).add(&Hermitian::identity(rho.dims())).sub(&ln_s)
    } else {
        rho.clone()
    };
    let g_sigma = if need[1] { clipped(&ss).frechet(Scalar::Ln, rho).scale(-1.0) } else { sigma.clone() };
    Ok((Some(value), g_rho, g_sigma))
}

/// D(A‖B) with the Umegaki relative entropy.
pub fn d_sets(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        return Ok(SetDivergenceResult::exact(divergences::umegaki(r, s)?.value, r.clone(), s.clone()));
    }
    let res = fw_pair(a, b, umegaki_grad, |_, _| Ok(None), FwOptions { tol: 1e-9, max_iter: 2000, max_line: 30 })?;
    let upper = res.value.map_or(Value::Infinite, |v| Value::Finite(v / LN_2));
    let lower = if res.lower_bound.is_finite() { Value::Finite(res.lower_bound / LN_2) } else { neg_inf() };
    let mut out = SetDivergenceResult::bounded(upper, lower, upper, res.x[0].clone(), res.x[1].clone());
    out.iterations = res.iterations;
    out.converged = res.converged || out.gap <= 1e-7;
    out.heuristic = res.value.is_none() && !a.is_enumerable();
    Ok(out)
}

/// Q = tr[ρ^α σ^{1−α}] and its gradients.
fn petz_grad(alpha: f64, rho: &Hermitian, sigma: &Hermitian, need: &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)> {
    let ss = sigma.eig()?;
    if alpha > 1.0 && !support_contained(rho, &ss) {
        return Ok((None, rho.clone(), sigma.clone()));
    }
    let sr = rho.eig()?;
    let (cr, cs) = (clipped(&sr), clipped(&ss));
    let sb = if alpha > 1.0 { cs.map(|v| v.powf(1.0 - alpha)) } else { ss.map(|v| v.max(0.0).powf(1.0 - alpha)) };
    let ra = sr.map(|v| v.max(0.0).powf(alpha));
    let q = ra.inner(&sb);
    let g_rho = if need[0] { cr.frechet(Scalar::Pow(alpha), &sb) } else { rho.clone() };
    let g_sigma = if need[1] { cs.frechet(Scalar::Pow(1.0 - alpha), &ra) } else { sigma.clone() };
    Ok((Some(q), g_rho, g_sigma))
}

/// Q = tr[(σ^γ ρ σ^γ)^α], γ = (1−α)/2α, and its gradients.
fn sandwiched_grad(alpha: f64, rho: &Hermitian, sigma: &Hermitian, need: &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)> {
    let ss = sigma.eig()?;
    if alpha > 1.0 && !support_contained(rho, &ss) {
        return Ok((None, rho.clone(), sigma.clone()));
    }
    let gamma = (1.0 - alpha) / (2.0 * alpha);
    let cs = clipped(&ss);
    let a_op = if alpha > 1.0 { cs.map(|v| v.powf(gamma)) } else { ss.map(|v| v.max(0.0).powf(gamma)) };
    let z = rho.sandwich(&a_op);
    let sz = z.eig()?;
    let q: f64 = sz.values.iter().map(|v| v.max(0.0).powf(alpha)).sum();
    let zp = clipped(&sz).map(|v| v.powf(alpha - 1.0));
    let g_rho = if need[0] { zp.sandwich(&a_op).scale(alpha) } else { rho.clone() };
    let g_sigma = if need[1] {
        let m = rho.matrix() * a_op.matrix() * zp.matrix();
        let g = Hermitian::from_parts((&m + m.adjoint()) * C64::new(alpha, 0.0), rho.dims().to_vec());
        cs.frechet(Scalar::Pow(gamma), &g)
    } else {
        sigma.clone()
    };
    Ok((Some(q), g_rho, g_sigma))
}

type QGrad = fn(f64, &Hermitian, &Hermitian, &[bool]) -> Result<(Option<f64>, Hermitian, Hermitian)>;

/// Minimizes D over A×B through the jointly concave (α < 1) or convex
/// (α > 1) trace functional Q.
fn renyi_fw(alpha: f64, a: &StateSet, b: &StateSet, q: QGrad) -> Result<SetDivergenceResult> {
    let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
    let f = |r: &Hermitian, s: &Hermitian, need: &[bool]| -> Result<(Option<f64>, Hermitian, Hermitian)> {
        let (v, g1, g2) = q(alpha, r, s, need)?;
        Ok((v.map(|v| sign * v), g1.scale(sign), g2.scale(sign)))
    };
    let res = fw_pair(a, b, f, |_, _| Ok(None), FwOptions { tol: 1e-10, max_iter: 2000, max_line: 30 })?;
    let upper = res.value.map_or(Value::Infinite, |v| renyi_value(alpha, sign * v));
    let lower = if res.lower_bound.is_finite() { renyi_value(alpha, sign * res.lower_bound) } else { neg_inf() };
    let mut out = SetDivergenceResult::bounded(upper, lower, upper, res.x[0].clone(), res.x[1].clone());
    out.iterations = res.iterations;
    out.converged = res.converged || out.gap <= 1e-7;
    Ok(out)
}

/// Petz Rényi divergence between sets, α ∈ (0, 1) ∪ (1, 2].
pub fn petz_sets(alpha: f64, a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    Regime::of(alpha)?;
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        return Ok(SetDivergenceResult::exact(divergences::petz(alpha, r, s)?.value, r.clone(), s.clone()));
    }
    if alpha > 2.0 {
        return Err(Error::param("alpha", alpha, "Petz divergence between sets needs alpha <= 2 (joint convexity)"));
    }
    renyi_fw(alpha, a, b, petz_grad)
}

/// Sandwiched Rényi divergence between sets, α ≥ 1/2, α ≠ 1.
pub fn sandwiched_sets(alpha: f64, a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    Regime::of(alpha)?;
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        return Ok(SetDivergenceResult::exact(divergences::sandwiched(alpha, r, s)?.value, r.clone(), s.clone()));
    }
    if alpha < 0.5 {
        return Err(Error::param("alpha", alpha, "sandwiched divergence between sets needs alpha >= 1/2 (joint convexity)"));
    }
    renyi_fw(alpha, a, b, sandwiched_grad)
}

/// D_min(A‖B) = inf of −log tr[Π_ρ σ]. Exact over enumerable A (the
/// projector of a mixture dominates those of its components); for other
/// kinds A's interior point is used, which has maximal support.
pub fn dmin_sets(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    check_sets(a, b)?;
    let candidates = a.generators().unwrap_or_else(|| vec![a.interior_point()]);
    let mut best: Option<(f64, Hermitian, Hermitian)> = None;
    for r in candidates {
        let p = r.support_projector()?;
        let s = b.max_linear(&p)?;
        if best.as_ref().is_none_or(|x| s.value > x.0) {
            best = Some((s.value, r, s.witness));
        }
    }
    let (q, r, s) = best.expect("non-empty");
    let v = if q <= Tol::SupportFloor.get() { Value::Infinite } else { Value::Finite(-q.log2()) };
    let mut out = SetDivergenceResult::exact(v, r, s);
    out.heuristic = !a.is_enumerable();
    Ok(out)
}

// ---------------------------------------------------------------------------
// semidefinite programs over conic lifts

fn sdp_options() -> SdpOptions {
    SdpOptions { gap_tol: 1e-10, ..Default::default() }
}

fn value_of(lift_y: &Lmi, x: &[f64], dims: &[usize]) -> Hermitian {
    let m = lift_y.eval(x);
    Hermitian::from_parts((&m + m.adjoint()) * C64::new(0.5, 0.0), dims.to_vec())
}

/// Start value of a lift at scale c = 1: (Y, t(Y)).
fn lift_start(set: &StateSet) -> (Hermitian, f64) {
    let mut m = Model::new();
    let l = set.cone_lift(&mut m, 1.0);
    (value_of(&l.y, &m.start, set.dims()), l.start_scale)
}

/// Isometry onto the support of `h` (None when full rank).
fn support_isometry(h: &Hermitian) -> Result<Option<CMat>> {
    let sp = h.eig()?;
    let cols: Vec<usize> = (0..sp.dim()).filter(|&i| sp.in_support(i)).collect();
    if cols.len() == sp.dim() {
        return Ok(None);
    }
    let n = sp.dim();
    Ok(Some(CMat::from_fn(n, cols.len(), |r, c| sp.vectors[(r, cols[c])])))
}

fn compress(l: &Lmi, v: &Option<CMat>) -> Lmi {
    match v {
        None => l.clone(),
        Some(v) => {
            let vt = v.adjoint();
            l.map(|m| &vt * m * v)
        }
    }
}

fn leak(h: &Hermitian, v: &Option<CMat>) -> f64 {
    match v {
        None => 0.0,
        Some(v) => (h.trace() - (v.adjoint() * h.matrix() * v).trace().re).max(0.0),
    }
}

/// Members of A supported inside range(v), when A is described by
/// generators; None when A is not enumerable.
fn restrict_to(a: &StateSet, v: &Option<CMat>) -> Result<Option<Option<StateSet>>> {
    let Some(gens) = a.generators() else { return Ok(None) };
    let inside: Vec<Hermitian> = gens.into_iter().filter(|g| leak(g, v) <= Tol::SupportFloor.get() * g.trace().max(1e-300)).collect();
    if inside.is_empty() {
        return Ok(Some(None));
    }
    let set = if inside.len() == 1 { StateSet::singleton(inside[0].clone())? } else { StateSet::hull(inside)? };
    Ok(Some(Some(set)))
}

/// D_max(A‖B) = inf over ρ ∈ A, σ ∈ B of log min{t : ρ ≤ tσ}, solved as one
/// program: X ∈ A, Y ∈ cone(B), Y ⪰ X, minimize the scale of Y.
pub fn dmax_sets(a: &StateSet, b: &StateSet) -> Result<SetDivergenceResult> {
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        return Ok(SetDivergenceResult::exact(divergences::dmax(r, s)?.value, r.clone(), s.clone()));
    }
    let dims = a.dims().to_vec();
    let (y1, _) = lift_start(b);
    let v = support_isometry(&y1)?;
    let (x1, s1) = lift_start(a);
    let x0 = x1.scale(1.0 / s1);
    if leak(&x0, &v) > Tol::SupportFloor.get() {
        return match restrict_to(a, &v)? {
            Some(Some(inner)) => dmax_sets(&inner, b),
            Some(None) => Ok(SetDivergenceResult::exact(Value::Infinite, x0, b.interior_point())),
            None => {
                let mut out = SetDivergenceResult::exact(Value::Infinite, x0, b.interior_point());
                out.lower = neg_inf();
                out.heuristic = true;
                out.converged = false;
                Ok(out)
            }
        };
    }
    let lam = divergences::dmax(&x0, &y1)?.scalar.unwrap_or(1.0);
    let mut m = Model::new();
    let la = a.cone_lift(&mut m, 1.0 / s1);
    m.eq(la.scale.plus(&LinIneq::constant(-1.0)));
    let lb = b.cone_lift(&mut m, 1.5 * lam + 1e-3);
    m.lmi(compress(&lb.y.minus(&la.y), &v));
    m.minimize(&lb.scale);
    let sol = m.solve(sdp_options())?;
    let t = sol.value;
    let rho = value_of(&la.y, &sol.x, &dims);
    let sigma = value_of(&lb.y, &sol.x, &dims).scale(1.0 / t);
    let upper = Value::Finite(t.log2());
    let lower = Value::Finite((t - sol.gap).max(1e-300).log2());
    let mut out = SetDivergenceResult::bounded(upper, lower, upper, rho, sigma);
    out.iterations = sol.newton_steps;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Robustness {
    /// R(ρ) = 2^{D_max(ρ‖F)} − 1
    pub robustness: Value,
    pub dmax: SetDivergenceResult,
}

/// Global robustness of ρ against the free set.
pub fn global_robustness(rho: &Hermitian, free: &StateSet) -> Result<Robustness> {
    let d = dmax_sets(&StateSet::singleton(rho.clone())?, free)?;
    let robustness = d.value.map(|v| (v.exp2() - 1.0).max(0.0));
    Ok(Robustness { robustness, dmax: d })
}

#[derive(Clone, Debug)]
pub struct SetHypothesis {
    pub result: SetDivergenceResult,
    /// β_ε(A‖B), the optimal worst-case type-II error.
    pub beta: f64,
    pub test: TestOperator,
}

/// D_H,ε(A‖B) = −log β_ε(A‖B) with β_ε(A‖B) = min over tests 0 ≤ M ≤ I of
/// h_B(M) subject to h_A(I − M) ≤ ε. This equals the sup over pairs of the
/// pairwise β, so the minimax needs no alternation.
pub fn dhypo_sets(epsilon: f64, a: &StateSet, b: &StateSet) -> Result<SetHypothesis> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0,1)"));
    }
    check_sets(a, b)?;
    if let Some((r, s)) = singletons(a, b) {
        let h = divergences::beta_and_dhypo(epsilon, r, s)?;
        let mut result = SetDivergenceResult::exact(h.dh, r.clone(), s.clone());
        result.gap = h.residual;
        return Ok(SetHypothesis { result, beta: h.beta, test: h.test });
    }
    let dims = a.dims().to_vec();
    let n = a.dim();
    let id = Hermitian::identity(&dims);
    let ha_id = a.max_linear(&id)?.value.max(1.0);
    let delta = epsilon / (4.0 * ha_id);
    let m0 = id.scale(1.0 - delta);
    let hb0 = b.max_linear(&m0)?.value;

    let mut m = Model::new();
    let off = m.alloc(&hermitian_coords(m0.matrix()));
    let test = Lmi::var(n, off);
    m.lmi(test.clone());
    let rest = Lmi::constant(id.matrix().clone()).minus(&test);
    m.lmi(rest.clone());
    a.epigraph(&mut m, &rest, &LinIneq::constant(epsilon), delta);
    let toff = m.alloc(&[hb0.max(0.0) + 1.2]);
    let t = LinIneq { constant: 0.0, coeffs: vec![(toff, 1.0)] };
    b.epigraph(&mut m, &test, &t, 0.1);
    m.minimize(&t);
    let sol = m.solve(sdp_options())?;
    let mm = value_of(&test, &sol.x, &dims);
    let rho = a.max_linear(&id.sub(&mm))?.witness;
    let sigma = b.max_linear(&mm)?.witness;
    let op = TestOperator::new(mm, &[&rho], &[&sigma])?;
    let beta = op.type2.max(sol.value - sol.gap).min(sol.value);
    let dh = |x: f64| if x > Tol::SupportFloor.get() { Value::Finite(-x.log2()) } else { Value::Infinite };
    let value = dh(sol.value);
    let mut result = SetDivergenceResult::bounded(value, value, dh(sol.value - sol.gap), rho, sigma);
    result.iterations = sol.newton_steps;
    Ok(SetHypothesis { result, beta, test: op })
}

#[derive(Clone, Debug)]
pub struct SmoothedSetDmax {
    /// D_max^ε(B‖F) with the normalized trace-distance ball.
    pub value: Value,
    pub gap: f64,
    /// Optimal member σ* of B.
    pub sigma_star: Hermitian,
    /// Optimal smoothed state σ′, within ε of σ*.
    pub sigma_prime: Hermitian,
}

/// inf over σ ∈ B and states σ′ with ½‖σ′ − σ‖₁ ≤ ε of D_max(σ′‖F).
pub fn dmax_smoothed_sets(epsilon: f64, b: &StateSet, f: &StateSet) -> Result<SmoothedSetDmax> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0,1)"));
    }
    check_sets(b, f)?;
    let dims = b.dims().to_vec();
    let n = b.dim();
    let (y1, _) = lift_start(f);
    let v = support_isometry(&y1)?;
    let r = v.as_ref().map_or(n, |v| v.ncols());
    let (x1, s1) = lift_start(b);
    let x0 = x1.scale(1.0 / s1);
    let embed = |c: &CMat| -> CMat {
        match &v {
            None => c.clone(),
            Some(v) => v * c * v.adjoint(),
        }
    };
    // σ′ start: X0 compressed to the support of F, renormalized, mixed with the identity
    let xc = match &v {
        None => x0.matrix().clone(),
        Some(v) => v.adjoint() * x0.matrix() * v,
    };
    let tr = xc.trace().re;
    if tr <= Tol::SupportFloor.get() {
        return Ok(SmoothedSetDmax { value: Value::Infinite, gap: 0.0, sigma_star: x0.clone(), sigma_prime: x0 });
    }
    let eta = epsilon / 4.0;
    let sc0 = xc * C64::new((1.0 - eta) / tr, 0.0) + CMat::identity(r, r) * C64::new(eta / r as f64, 0.0);
    let sp0 = Hermitian::from_parts(embed(&sc0), dims.clone());
    let d0 = sp0.sub(&x0).positive_part()?.trace();
    if d0 >= epsilon {
        return Err(Error::Unsupported("no strictly feasible smoothing start inside the support of the free set".into()));
    }
    let kappa = (epsilon - d0) / (2.0 * n as f64);
    let p0 = sp0.sub(&x0).positive_part()?.add(&Hermitian::identity(&dims).scale(kappa));
    let lam = divergences::dmax(&sp0, &y1)?.scalar.unwrap_or(1.0);

    let mut m = Model::new();
    let lb = b.cone_lift(&mut m, 1.0 / s1);
    m.eq(lb.scale.plus(&LinIneq::constant(-1.0)));
    // σ̃ with unit trace: coordinates of all but the last diagonal entry
    let coords = hermitian_coords(&sc0);
    let skip = r - 1;
    let start: Vec<f64> = coords.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, x)| *x).collect();
    let soff = m.alloc(&start);
    let st = Lmi::var_trace_one(r, soff);
    m.lmi(st.clone());
    let sprime = st.map(embed);
    let poff = m.alloc(&hermitian_coords(p0.matrix()));
    let p = Lmi::var(n, poff);
    m.lmi(p.clone());
    m.lmi(p.minus(&sprime).plus(&lb.y));
    m.lin(LinIneq::constant(epsilon).plus(&p.trace().scaled(-1.0)));
    let lf = f.cone_lift(&mut m, 1.5 * lam + 1e-3);
    m.lmi(compress(&lf.y.minus(&sprime), &v));
    m.minimize(&lf.scale);
    let sol = m.solve(sdp_options())?;
    Ok(SmoothedSetDmax {
        value: Value::Finite(sol.value.log2()),
        gap: sol.gap,
        sigma_star: value_of(&lb.y, &sol.x, &dims),
        sigma_prime: value_of(&sprime, &sol.x, &dims),
    })
}

/// inf over σ ∈ B of tr(Z − σ)₊ (the trace distance for unit-trace Z and
/// σ), with the minimizer.
pub fn trace_distance_to_set(z: &Hermitian, b: &StateSet) -> Result<(f64, Hermitian)> {
    if z.dim() != b.dim() {
        return Err(Error::Dimension(format!("operator of dimension {} against a set of dimension {}", z.dim(), b.dim())));
    }
    let dims = b.dims().to_vec();
    let z = z.clone().with_dims(dims.clone())?;
    if let Kind::Singleton(r) = b.kind() {
        return Ok((z.sub(r).positive_part()?.trace(), r.clone()));
    }
    let n = b.dim();
    let (x1, s1) = lift_start(b);
    let x0 = x1.scale(1.0 / s1);
    let p0 = z.sub(&x0).positive_part()?.add(&Hermitian::identity(&dims).scale(0.1));
    let mut m = Model::new();
    let lb = b.cone_lift(&mut m, 1.0 / s1);
    m.eq(lb.scale.plus(&LinIneq::constant(-1.0)));
    let off = m.alloc(&hermitian_coords(p0.matrix()));
    let p = Lmi::var(n, off);
    m.lmi(p.clone());
    m.lmi(p.plus(&lb.y).minus(&Lmi::constant(z.matrix().clone())));
    m.minimize(&p.trace());
    let sol = m.solve(sdp_options())?;
    Ok((sol.value.max(0.0), value_of(&lb.y, &sol.x, &dims)))
}

// ---------------------------------------------------------------------------
// additivity harnesses

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alpha")]
pub enum SubadditiveTag {
    Umegaki,
    Sandwiched(f64),
    Dmax,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub m: usize,
    pub k: usize,
    /// D(A_{m+k}‖B_{m+k})
    pub joint: Value,
    pub part_m: Value,
    pub part_k: Value,
    /// joint − part_m − part_k
    pub difference: f64,
    pub slack: f64,
    pub passed: bool,
    pub heuristic: bool,
}

fn additivity(m: usize, k: usize, vals: [&SetDivergenceResult; 3], superadditive: bool) -> AdditivityReport {
    let [j, a, b] = vals;
    let difference = match (j.value, a.value, b.value) {
        (Value::Finite(x), Value::Finite(y), Value::Finite(z)) => x - y - z,
        (Value::Infinite, _, _) if superadditive => f64::INFINITY,
        (_, Value::Infinite, _) | (_, _, Value::Infinite) if !superadditive => f64::NEG_INFINITY,
        _ => f64::NAN,
    };
    let passed = if superadditive { difference >= -Tol::Additivity.get() } else { difference <= Tol::Additivity.get() };
    AdditivityReport {
        m,
        k,
        joint: j.value,
        part_m: a.value,
        part_k: b.value,
        difference,
        slack: Tol::Additivity.get(),
        passed,
        heuristic: vals.iter().any(|r| r.heuristic || !r.converged),
    }
}

fn check_mk(m: usize, k: usize) -> Result<()> {
    if m == 0 || k == 0 {
        return Err(Error::param("m, k", 0.0, "copy counts start at one"));
    }
    Ok(())
}

/// D_{M(,α)}(A_{m+k}‖B_{m+k}) − D_{M(,α)}(A_m‖B_m) − D_{M(,α)}(A_k‖B_k) ≥ −slack.
pub fn superadditivity_check(a: &SetFamily, b: &SetFamily, m: usize, k: usize, alpha: Option<f64>) -> Result<AdditivityReport> {
    check_mk(m, k)?;
    let run = |n: usize| -> Result<SetDivergenceResult> {
        let (x, y) = (a.at(n)?, b.at(n)?);
        match alpha {
            Some(al) => dm_alpha_sets(al, &x, &y),
            None => dm_sets(&x, &y),
        }
    };
    let (j, p, q) = (run(m + k)?, run(m)?, if k == m { None } else { Some(run(k)?) });
    let q = q.as_ref().unwrap_or(&p);
    Ok(additivity(m, k, [&j, &p, q], true))
}

/// D(A_{m+k}‖B_{m+k}) ≤ D(A_m‖B_m) + D(A_k‖B_k) + slack.
pub fn subadditivity_check(a: &SetFamily, b: &SetFamily, tag: SubadditiveTag, m: usize, k: usize) -> Result<AdditivityReport> {
    check_mk(m, k)?;
    let run = |n: usize| -> Result<SetDivergenceResult> {
        let (x, y) = (a.at(n)?, b.at(n)?);
        match tag {
            SubadditiveTag::Umegaki => d_sets(&x, &y),
            SubadditiveTag::Sandwiched(al) => sandwiched_sets(al, &x, &y),
            SubadditiveTag::Dmax => dmax_sets(&x, &y),
        }
    };
    let (j, p, q) = (run(m + k)?, run(m)?, if k == m { None } else { Some(run(k)?) });
    let q = q.as_ref().unwrap_or(&p);
    Ok(additivity(m, k, [&j, &p, q], false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn plus() -> Hermitian {
        Hermitian::pure_real(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2])
    }

    #[test]
    fn coherence_of_plus() {
        let a = StateSet::singleton(plus()).unwrap();
        let f = StateSet::incoherent(vec![2]).unwrap();
        let d = d_sets(&a, &f).unwrap();
        assert!((d.value.unwrap() - 1.0).abs() < 1e-7, "{d:?}");
        let m = dm_sets(&a, &f).unwrap();
        assert!((m.value.unwrap() - 1.0).abs() < 1e-5, "{m:?}");
        assert!(m.value.unwrap() <= 1.0 + 1e-12);
        let x = dmax_sets(&a, &f).unwrap();
        assert!((x.value.unwrap() - 1.0).abs() < 1e-7, "{x:?}");
        assert!(f.contains(&x.sigma_witness, 1e-6).unwrap());
    }

    #[test]
    fn singletons_match_pairwise() {
        let mut rng = random::rng(11);
        let (r, s) = (random::density(2, &mut rng), random::density(2, &mut rng));
        let a = StateSet::hull(vec![r.clone()]).unwrap();
        let b = StateSet::hull(vec![s.clone()]).unwrap();
        let dm = measured::dm(&r, &s).unwrap().value.unwrap();
        let got = dm_sets(&a, &b).unwrap();
        assert!((got.value.unwrap() - dm).abs() < 1e-5, "{got:?} vs {dm}");
        let d = divergences::umegaki(&r, &s).unwrap().value.unwrap();
        assert!((d_sets(&a, &b).unwrap().value.unwrap() - d).abs() < 1e-7);
        let half = measured::dm_alpha(0.5, &r, &s).unwrap().value.unwrap();
        assert!((dm_alpha_sets(0.5, &a, &b).unwrap().value.unwrap() - half).abs() < 1e-5);
        let h = divergences::beta_and_dhypo(0.2, &r, &s).unwrap();
        let got = dhypo_sets(0.2, &a, &b).unwrap();
        assert!((got.beta - h.beta).abs() < 1e-8, "{} vs {}", got.beta, h.beta);
        let x = divergences::dmax(&r, &s).unwrap().value.unwrap();
        assert!((dmax_sets(&a, &b).unwrap().value.unwrap() - x).abs() < 1e-8);
        let p = divergences::petz(1.5, &r, &s).unwrap().value.unwrap();
        assert!((petz_sets(1.5, &a, &b).unwrap().value.unwrap() - p).abs() < 1e-7);
        let q = divergences::sandwiched(0.7, &r, &s).unwrap().value.unwrap();
        assert!((sandwiched_sets(0.7, &a, &b).unwrap().value.unwrap() - q).abs() < 1e-7);
    }

    #[test]
    fn identity_reference() {
        // D_M(I/d ‖ {I}) = −log d
        let a = StateSet::conditional(1, 2).unwrap();
        let b = StateSet::hull(vec![Hermitian::identity(&[1, 2])]).unwrap();
        let got = dm_sets(&a, &b).unwrap();
        assert!((got.value.unwrap() + 1.0).abs() < 1e-5, "{got:?}");
    }

    #[test]
    fn sandwich_chain_on_hulls() {
        let mut rng = random::rng(4);
        let a = StateSet::hull(vec![random::density(2, &mut rng), random::density(2, &mut rng)]).unwrap();
        let b = StateSet::hull(vec![random::density(2, &mut rng), random::density(2, &mut rng)]).unwrap();
        let dmin = dmin_sets(&a, &b).unwrap().value.unwrap();
        let half = dm_alpha_sets(0.5, &a, &b).unwrap();
        let dm = dm_sets(&a, &b).unwrap();
        let d = d_sets(&a, &b).unwrap();
        assert!(dm.gap <= Tol::Gap.get() && half.gap <= Tol::Gap.get(), "{dm:?} {half:?}");
        assert!(dmin <= half.value.unwrap() + 1e-4);
        assert!(half.value.unwrap() <= dm.value.unwrap() + 1e-4);
        assert!(dm.value.unwrap() <= d.value.unwrap() + 1e-4);
        let high = dm_alpha_sets(1.5, &a, &b).unwrap();
        assert!(high.gap <= Tol::Gap.get(), "{high:?}");
        assert!(high.value.unwrap() >= dm.value.unwrap() - 1e-4);
    }

    #[test]
    fn rains_and_mana_fallbacks() {
        let mut rng = random::rng(8);
        let rho = random::density(4, &mut rng).with_dims(vec![2, 2]).unwrap();
        let a = StateSet::singleton(rho.clone()).unwrap();
        let ppt = StateSet::rains(2, 2).unwrap();
        let dm = dm_sets(&a, &ppt).unwrap();
        let d = d_sets(&a, &ppt).unwrap();
        assert!(dm.value.unwrap() <= d.value.unwrap() + 1e-4, "{dm:?} {d:?}");
        assert!(dm.heuristic || dm.gap <= Tol::Gap.get());
        assert!(dm.lower.unwrap() <= dm.upper.unwrap());
        let x = dmax_sets(&a, &ppt).unwrap();
        assert!(x.value.unwrap() >= d.value.unwrap() - 1e-6);
    }

    #[test]
    fn hypothesis_on_hull_matches_worst_pair() {
        // commuting: the composite β is the max over pairs
        let r1 = Hermitian::diag(&[0.9, 0.1]);
        let r2 = Hermitian::diag(&[0.7, 0.3]);
        let s = Hermitian::diag(&[0.2, 0.8]);
        let a = StateSet::hull(vec![r1.clone(), r2.clone()]).unwrap();
        let b = StateSet::singleton(s.clone()).unwrap();
        let got = dhypo_sets(0.25, &a, &b).unwrap();
        let want = [r1, r2].iter().map(|r| divergences::beta_and_dhypo(0.25, r, &s).unwrap().beta).fold(0.0, f64::max);
        assert!((got.beta - want).abs() < 1e-7, "{} vs {want}", got.beta);
    }

    #[test]
    fn smoothed_and_distance() {
        let f = StateSet::incoherent(vec![2]).unwrap();
        let b = StateSet::singleton(plus()).unwrap();
        let s = dmax_smoothed_sets(0.1, &b, &f).unwrap();
        let full = dmax_sets(&b, &f).unwrap().value.unwrap();
        assert!(s.value.unwrap() < full);
        assert!(s.sigma_prime.sub(&s.sigma_star).trace_norm().unwrap() / 2.0 <= 0.1 + 1e-7);
        let (t, w) = trace_distance_to_set(&plus(), &f).unwrap();
        assert!((t - 0.5).abs() < 1e-7, "{t}");
        assert!(f.contains(&w, 1e-6).unwrap());
    }
}
