//! Measured relative entropy and measured Rényi divergences through their
//! variational formulas, optimized over ω = exp(S) with S Hermitian.

use crate::tolerances::Tol;
use crate::divergences::{sandwiched, support_contained, umegaki};
use crate::error::{Error, Result};
use crate::hermitian::{spec_count, CMat, Hermitian, Scalar, Spectral};
use crate::optim::lbfgs::{self, LbfgsOptions};
use crate::optim::{herm_from_vec, herm_to_vec};
use crate::value::Value;
use serde::Serialize;
use std::f64::consts::LN_2;

/// Values above this many bits are reported as infinite.
pub const MEASURED_CAP_BITS: f64 = 60.0;
/// Largest α accepted by [`dm_alpha`].
pub const ALPHA_CAP: f64 = 50.0;

#[derive(Clone, Debug, Serialize)]
pub struct MeasuredResult {
    pub value: Value,
    /// Optimal ω (α = 1) or W (Rényi), on the full space.
    #[serde(skip)]
    pub witness: Hermitian,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Compression onto the support of σ: isometry V with V†σV full rank.
struct Frame {
    v: CMat,
    full: bool,
}

impl Frame {
    fn of(sp: &Spectral) -> Self {
        let cols: Vec<usize> = (0..sp.dim()).filter(|&i| sp.in_support(i)).collect();
        let n = sp.dim();
        let v = CMat::from_fn(n, cols.len(), |r, c| sp.vectors[(r, cols[c])]);
        Self { full: cols.len() == n, v }
    }

    fn identity(n: usize) -> Self {
        Self { v: CMat::identity(n, n), full: true }
    }

    fn compress(&self, h: &Hermitian) -> Hermitian {
        if self.full {
            return h.clone();
        }
        let k = self.v.ncols();
        Hermitian::from_parts(self.v.adjoint() * h.matrix() * &self.v, vec![k])
    }

    fn embed(&self, h: &Hermitian, dims: &[usize]) -> Hermitian {
        if self.full {
            return h.clone().with_dims(dims.to_vec()).expect("dims");
        }
        Hermitian::from_parts(&self.v * h.matrix() * self.v.adjoint(), dims.to_vec())
    }
}

/// tr[A e^{pS}] and its gradient p·Dexp(pS)[A] with respect to S.
pub(crate) fn exp_term(sp: &Spectral, p: f64, a: &Hermitian) -> (f64, Hermitian) {
    let ps = sp.scaled(p);
    let value = a.inner(&ps.map(f64::exp));
    let grad = ps.frechet(Scalar::Exp, a).scale(p);
    (value, grad)
}

fn options() -> LbfgsOptions {
    LbfgsOptions { grad_tol: 1e-10, max_iter: 5000, memory: 20, lower_cap: -MEASURED_CAP_BITS * LN_2 }
}

/// D_M(ρ‖σ) = sup_ω tr[ρ log ω] + 1 − tr[σω] (natural log inside, bits out).
pub fn dm(rho: &Hermitian, sigma: &Hermitian) -> Result<MeasuredResult> {
    rho.check_same_shape(sigma)?;
    let (rho, sigma) = (rho.clip_psd()?, sigma.clip_psd()?);
    let ss = sigma.eig()?;
    let dims = rho.dims().to_vec();
    if !support_contained(&rho, &ss) {
        return Ok(MeasuredResult {
            value: Value::Infinite,
            witness: Hermitian::identity(&dims),
            iterations: 0,
            gradient_norm: f64::NAN,
            converged: true,
        });
    }
    let frame = Frame::of(&ss);
    let (r, s) = (frame.compress(&rho), frame.compress(&sigma));
    let k = r.dim();
    let kd = [k];
    // minimize −tr[ρS] − 1 + tr[σe^S]
    let f = |x: &[f64]| {
        let sh = herm_from_vec(x, &kd);
        let Ok(sp) = sh.eig() else { return (f64::NAN, vec![0.0; x.len()]) };
        let (es, g) = exp_term(&sp, 1.0, &s);
        (-r.inner(&sh) - 1.0 + es, herm_to_vec(&g.sub(&r)))
    };
    let res = lbfgs::minimize(vec![0.0; k * k], f, options());
    let s_opt = herm_from_vec(&res.x, &kd);
    let omega = s_opt.eig()?.map(f64::exp);
    let value = if res.unbounded {
        Value::Infinite
    } else {
        Value::Finite((-res.value) / LN_2)
    };
    Ok(MeasuredResult {
        value,
        witness: frame.embed(&omega, &dims),
        iterations: res.iterations,
        gradient_norm: res.grad_norm,
        converged: res.unbounded || res.grad_norm <= Tol::Stationarity.get(),
    })
}

/// Regime of the Rényi variational formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// α ∈ (0, 1/2): inf α tr[ρW] + (1−α) tr[σW^{α/(α−1)}]
    Low,
    /// α ∈ [1/2, 1): inf α tr[ρW^{(α−1)/α}] + (1−α) tr[σW]
    Mid,
    /// α > 1: sup α tr[ρW^{(α−1)/α}] + (1−α) tr[σW]
    High,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha != 1.0) {
            return Err(Error::param("alpha", alpha, "must lie in (0,1) or (1,inf)"));
        }
        Ok(if alpha < 0.5 {
            Regime::Low
        } else if alpha < 1.0 {
            Regime::Mid
        } else {
            Regime::High
        })
    }

    /// Exponents (p_ρ, p_σ) with Q(W) = α tr[ρW^{p_ρ}] + (1−α) tr[σW^{p_σ}].
    pub fn exponents(self, alpha: f64) -> (f64, f64) {
        match self {
            Regime::Low => (1.0, alpha / (alpha - 1.0)),
            Regime::Mid | Regime::High => ((alpha - 1.0) / alpha, 1.0),
        }
    }
}

/// Q(W) of the regime, with W = e^S, and its gradient in S.
pub(crate) fn renyi_q(alpha: f64, rho: &Hermitian, sigma: &Hermitian, sp: &Spectral) -> Result<(f64, Hermitian)> {
    let (pr, ps) = Regime::of(alpha)?.exponents(alpha);
    let (a, ga) = exp_term(sp, pr, rho);
    let (b, gb) = exp_term(sp, ps, sigma);
    Ok((alpha * a + (1.0 - alpha) * b, ga.scale(alpha).add(&gb.scale(1.0 - alpha))))
}

/// D_{M,α}(ρ‖σ) by the variational formula of the α regime. Every iterate is
/// feasible, so the reported value never exceeds the true one.
pub fn dm_alpha(alpha: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<MeasuredResult> {
    let regime = Regime::of(alpha)?;
    if alpha > ALPHA_CAP {
        return Err(Error::param("alpha", alpha, "above the cap of 50; use max-relative entropy bounds"));
    }
    rho.check_same_shape(sigma)?;
    let (rho, sigma) = (rho.clip_psd()?, sigma.clip_psd()?);
    let ss = sigma.eig()?;
    let dims = rho.dims().to_vec();
    let high = regime == Regime::High;
    if high && !support_contained(&rho, &ss) {
        return Ok(MeasuredResult {
            value: Value::Infinite,
            witness: Hermitian::identity(&dims),
            iterations: 0,
            gradient_norm: f64::NAN,
            converged: true,
        });
    }
    let frame = if high { Frame::of(&ss) } else { Frame::identity(rho.dim()) };
    let (r, s) = (frame.compress(&rho), frame.compress(&sigma));
    let k = r.dim();
    let kd = [k];
    let sign = if high { -1.0 } else { 1.0 };
    let f = |x: &[f64]| {
        let sh = herm_from_vec(x, &kd);
        let Ok(sp) = sh.eig() else { return (f64::NAN, vec![0.0; x.len()]) };
        match renyi_q(alpha, &r, &s, &sp) {
            Ok((q, g)) => (sign * q, herm_to_vec(&g.scale(sign))),
            Err(_) => (f64::NAN, vec![0.0; x.len()]),
        }
    };
    let mut opts = options();
    opts.lower_cap = f64::NEG_INFINITY;
    let res = lbfgs::minimize(vec![0.0; k * k], f, opts);
    let q = sign * res.value;
    let w = herm_from_vec(&res.x, &kd).eig()?.map(f64::exp);
    let value = if q <= 0.0 {
        Value::Infinite
    } else {
        let v = q.log2() / (alpha - 1.0);
        if v > MEASURED_CAP_BITS {
            Value::Infinite
        } else {
            Value::Finite(v)
        }
    };
    Ok(MeasuredResult {
        value,
        witness: frame.embed(&w, &dims),
        iterations: res.iterations,
        gradient_norm: res.grad_norm,
        converged: res.grad_norm <= Tol::Stationarity.get(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PinchingCheck {
    /// D_{M,α}
    pub lhs: f64,
    /// D_{S,α} (Umegaki at α = 1)
    pub mid: f64,
    /// D_{M,α} + 2 log |spec σ|
    pub rhs: f64,
    pub spec_count: usize,
    pub ok: bool,
}

/// Checks D_{M,α} ≤ D_{S,α} ≤ D_{M,α} + 2 log |spec σ| with slack 1e-6.
pub fn pinching_sandwich_check(alpha: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<PinchingCheck> {
    if !(alpha >= 0.5 && alpha.is_finite()) {
        return Err(Error::param("alpha", alpha, "must be at least 1/2"));
    }
    let (lhs, mid) = if alpha == 1.0 {
        (dm(rho, sigma)?.value, umegaki(rho, sigma)?.value)
    } else {
        (dm_alpha(alpha, rho, sigma)?.value, sandwiched(alpha, rho, sigma)?.value)
    };
    let count = spec_count(sigma, 1e-8)?;
    let (lhs, mid) = (lhs.to_f64(), mid.to_f64());
    let rhs = lhs + 2.0 * (count as f64).log2();
    let slack = 1e-6;
    let ok = if lhs.is_infinite() { mid.is_infinite() } else { lhs <= mid + slack && mid <= rhs + slack };
    Ok(PinchingCheck { lhs, mid, rhs, spec_count: count, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn kl(p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).log2()).sum()
    }

    fn renyi(a: f64, p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>().log2() / (a - 1.0)
    }

    #[test]
    fn dm_commuting_is_kl() {
        let (p, q) = ([0.6, 0.3, 0.1], [0.2, 0.5, 0.3]);
        let r = dm(&Hermitian::diag(&p), &Hermitian::diag(&q)).unwrap();
        assert!(r.converged);
        assert!((r.value.unwrap() - kl(&p, &q)).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn dm_of_equal_states_is_zero() {
        let mut g = random::rng(1);
        let rho = random::density(3, &mut g);
        let r = dm(&rho, &rho).unwrap();
        assert!(r.value.unwrap().abs() < 1e-10);
        assert!(r.witness.sub(&Hermitian::identity(&[3])).norm_fro() < 1e-6);
    }

    #[test]
    fn dm_alpha_commuting_is_classical() {
        let (p, q) = ([0.7, 0.2, 0.1], [0.3, 0.3, 0.4]);
        for a in [0.3, 0.5, 0.8, 1.5, 3.0] {
            let r = dm_alpha(a, &Hermitian::diag(&p), &Hermitian::diag(&q)).unwrap();
            assert!((r.value.unwrap() - renyi(a, &p, &q)).abs() < 1e-7, "alpha {a}: {} vs {}", r.value, renyi(a, &p, &q));
        }
    }

    #[test]
    fn dm_alpha_half_on_zero_and_plus() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = dm_alpha(0.5, &Hermitian::pure_real(&[1.0, 0.0]), &Hermitian::pure_real(&[s, s])).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let r = dm(&Hermitian::diag(&[0.5, 0.5]), &Hermitian::diag(&[1.0, 0.0])).unwrap();
        assert_eq!(r.value, Value::Infinite);
    }
}
