//! Divergences between a pair of operators: Umegaki, Petz and sandwiched
//! Rényi, min/max, smoothed max, and hypothesis testing.
//!
//! `rho` is a state (trace one, or at most one where noted) and `sigma` any
//! PSD operator. Values are in bits.

use crate::tolerances::Tol;
use crate::error::{Error, Result};
use crate::hermitian::{CMat, Hermitian, MatrixFn, Spectral, C64};
use crate::optim::barrier::{LinIneq, Lmi, Sdp, SdpOptions};
use crate::optim::bisect;
use crate::value::Value;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceResult {
    pub value: Value,
    /// Optimizing operator where the divergence is a program (smoothed ρ′).
    #[serde(skip)]
    pub witness: Option<Hermitian>,
    /// Scalar optimizer where there is one (the threshold x*, or t*).
    pub scalar: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Set when the value is infinite because of a support condition.
    pub support_violation: bool,
}

impl DivergenceResult {
    fn exact(value: Value) -> Self {
        Self { value, witness: None, scalar: None, iterations: 0, residual: 0.0, support_violation: false }
    }

    fn infinite_support() -> Self {
        Self { support_violation: true, ..Self::exact(Value::Infinite) }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha != 1.0) {
        return Err(Error::param("alpha", alpha, "must lie in (0,1) or (1,inf)"));
    }
    Ok(())
}

fn check_pair(rho: &Hermitian, sigma: &Hermitian) -> Result<(Hermitian, Hermitian)> {
    rho.check_same_shape(sigma)?;
    Ok((rho.clip_psd()?, sigma.clip_psd()?))
}

/// tr[ρ(I − Π_σ)]: the weight of ρ outside the support of σ.
pub(crate) fn support_leak(rho: &Hermitian, sp_sigma: &Spectral) -> f64 {
    let m = sp_sigma.to_eigenbasis(rho);
    (0..sp_sigma.dim()).filter(|&i| !sp_sigma.in_support(i)).map(|i| m[(i, i)].re).sum::<f64>().max(0.0)
}

/// Whether supp ρ ⊆ supp σ at the global floor.
pub(crate) fn support_contained(rho: &Hermitian, sp_sigma: &Spectral) -> bool {
    support_leak(rho, sp_sigma) <= Tol::SupportFloor.get() * rho.trace().max(f64::MIN_POSITIVE)
}

/// Σ p log p over the support, in nats.
fn neg_entropy_nats(sp: &Spectral) -> f64 {
    (0..sp.dim()).filter(|&i| sp.in_support(i)).map(|i| sp.values[i] * sp.values[i].ln()).sum()
}

/// tr[ρ ln σ] restricted to supp σ.
fn cross_log_nats(rho: &Hermitian, sp_sigma: &Spectral) -> f64 {
    let m = sp_sigma.to_eigenbasis(rho);
    (0..sp_sigma.dim())
        .filter(|&i| sp_sigma.in_support(i))
        .map(|i| m[(i, i)].re * sp_sigma.values[i].ln())
        .sum()
}

/// D(ρ‖σ) = tr[ρ(log ρ − log σ)].
pub fn umegaki(rho: &Hermitian, sigma: &Hermitian) -> Result<DivergenceResult> {
    let (rho, sigma) = check_pair(rho, sigma)?;
    let ss = sigma.eig()?;
    if !support_contained(&rho, &ss) {
        return Ok(DivergenceResult::infinite_support());
    }
    let sr = rho.eig()?;
    let v = (neg_entropy_nats(&sr) - cross_log_nats(&rho, &ss)) / std::f64::consts::LN_2;
    Ok(DivergenceResult::exact(Value::Finite(v)))
}

fn renyi_from_q(alpha: f64, q: f64) -> Value {
    if q <= 0.0 {
        return Value::Infinite;
    }
    Value::Finite(q.log2() / (alpha - 1.0))
}

/// Petz Rényi divergence (1/(α−1)) log tr[ρ^α σ^{1−α}].
pub fn petz(alpha: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<DivergenceResult> {
    check_alpha(alpha)?;
    let (rho, sigma) = check_pair(rho, sigma)?;
    let ss = sigma.eig()?;
    if alpha > 1.0 && !support_contained(&rho, &ss) {
        return Ok(DivergenceResult::infinite_support());
    }
    let ra = rho.eig()?.matrix_fn(MatrixFn::Power(alpha), 0.0, true)?;
    let sb = ss.matrix_fn(MatrixFn::Power(1.0 - alpha), 0.0, true)?;
    let q = ra.inner(&sb);
    let mut r = DivergenceResult::exact(renyi_from_q(alpha, q));
    r.support_violation = !r.value.is_finite();
    Ok(r)
}

/// Sandwiched Rényi divergence (1/(α−1)) log tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α].
pub fn sandwiched(alpha: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<DivergenceResult> {
    check_alpha(alpha)?;
    let (rho, sigma) = check_pair(rho, sigma)?;
    let ss = sigma.eig()?;
    if alpha > 1.0 && !support_contained(&rho, &ss) {
        return Ok(DivergenceResult::infinite_support());
    }
    let s = ss.matrix_fn(MatrixFn::Power((1.0 - alpha) / (2.0 * alpha)), 0.0, true)?;
    let y = rho.sandwich(&s);
    let ev = y.eigenvalues()?;
    // scaled by the top eigenvalue so that large α does not overflow
    let top = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let inner: f64 = if top > 0.0 { ev.iter().map(|v| (v.max(0.0) / top).powf(alpha)).sum() } else { 0.0 };
    if inner <= 0.0 {
        return Ok(DivergenceResult::infinite_support());
    }
    let log_q = alpha * top.log2() + inner.log2();
    Ok(DivergenceResult::exact(Value::Finite(log_q / (alpha - 1.0))))
}

/// −log tr[Π_ρ σ].
pub fn dmin(rho: &Hermitian, sigma: &Hermitian) -> Result<DivergenceResult> {
    let (rho, sigma) = check_pair(rho, sigma)?;
    let p = rho.support_projector()?;
    let q = p.inner(&sigma);
    if q <= Tol::SupportFloor.get() * sigma.trace().max(f64::MIN_POSITIVE) {
        return Ok(DivergenceResult::infinite_support());
    }
    Ok(DivergenceResult::exact(Value::Finite(-q.log2())))
}

/// log min{t : ρ ≤ tσ}.
pub fn dmax(rho: &Hermitian, sigma: &Hermitian) -> Result<DivergenceResult> {
    let (rho, sigma) = check_pair(rho, sigma)?;
    let ss = sigma.eig()?;
    if !support_contained(&rho, &ss) {
        return Ok(DivergenceResult::infinite_support());
    }
    let s = ss.matrix_fn(MatrixFn::Power(-0.5), 0.0, true)?;
    let t = rho.sandwich(&s).max_eigenvalue()?;
    if t <= 0.0 {
        return Err(Error::Undefined("max-relative entropy of the zero operator".into()));
    }
    let mut r = DivergenceResult::exact(Value::Finite(t.log2()));
    r.scalar = Some(t);
    Ok(r)
}

/// Distance used for the smoothing ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ball {
    /// Purified distance, subnormalized ρ′.
    Purified,
    /// Generalized trace distance ½‖ρ′−ρ‖₁ + ½|tr ρ′ − tr ρ|, subnormalized ρ′.
    Trace,
    /// Trace distance with tr ρ′ = 1.
    TraceNormalized,
}

/// Orthonormal basis of the support of σ (columns) and the compressed σ.
fn support_frame(sp: &Spectral) -> (CMat, CMat) {
    let cols: Vec<usize> = (0..sp.dim()).filter(|&i| sp.in_support(i)).collect();
    let n = sp.dim();
    let v = CMat::from_fn(n, cols.len(), |r, c| sp.vectors[(r, cols[c])]);
    let s = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        cols.len(),
        cols.iter().map(|&i| C64::new(sp.values[i], 0.0)),
    ));
    (v, s)
}

/// D_max^ε(ρ‖σ) = inf over ρ′ in the ε-ball of D_max(ρ′‖σ), as a
/// semidefinite program in (t, ρ′) with ρ′ restricted to supp σ.
pub fn dmax_smoothed(epsilon: f64, rho: &Hermitian, sigma: &Hermitian, ball: Ball) -> Result<DivergenceResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0,1)"));
    }
    let (rho, sigma) = check_pair(rho, sigma)?;
    let ss = sigma.eig()?;
    let (v, sc) = support_frame(&ss);
    let r = v.ncols();
    let n = rho.dim();
    if r == 0 {
        return Ok(DivergenceResult::infinite_support());
    }
    let vt = v.adjoint();
    let embed = |x: &CMat| &v * x * &vt;
    let compress = |x: &CMat| &vt * x * &v;
    let rho_c = compress(rho.matrix());
    let rho_tr = rho.trace();

    // t at index 0, then ρ′ (compressed)
    let x = match ball {
        Ball::TraceNormalized => Lmi::var_trace_one(r, 1),
        _ => Lmi::var(r, 1),
    };
    let nx = x.coeffs.len();
    let mut sdp = Sdp::new(0);
    let t_expr = Lmi { constant: CMat::zeros(r, r), coeffs: vec![(0, sc.clone())] };
    sdp.lmis.push(t_expr.minus(&x));
    sdp.lmis.push(x.clone());
    if ball != Ball::TraceNormalized {
        sdp.lin.push(LinIneq::constant(1.0).plus(&x.trace().scaled(-1.0)));
    }

    // starting point: ρ′ a shrunk copy of the compressed ρ
    let shrink = 1.0 - epsilon / 2.0;
    let kappa = epsilon * 1e-3 / r as f64;
    let mut x0c = &rho_c * C64::new(shrink, 0.0) + CMat::identity(r, r) * C64::new(kappa, 0.0);
    if ball == Ball::TraceNormalized {
        let tr: f64 = (0..r).map(|i| x0c[(i, i)].re).sum();
        x0c /= C64::new(tr, 0.0);
    }

    let mut start_extra: Vec<f64> = Vec::new();
    let mut nvars = 1 + nx;
    match ball {
        Ball::Trace | Ball::TraceNormalized => {
            // tr(ρ − ρ′)₊ ≤ ε (plus the trace term for the subnormalized ball)
            // through P ⪰ 0, P ⪰ ρ − ρ′
            let p = Lmi::var(n, nvars);
            nvars += n * n;
            let xe = x.map(|a| embed(a));
            sdp.lmis.push(p.clone());
            sdp.lmis.push(p.plus(&xe).minus(&Lmi::constant(rho.matrix().clone())));
            match ball {
                Ball::Trace => {
                    // ½‖Δ‖₁ + ½|trΔ| = max(tr Δ₊, tr Δ₋) for Δ = ρ − ρ′
                    let q = Lmi::var(n, nvars);
                    nvars += n * n;
                    sdp.lmis.push(q.clone());
                    sdp.lmis.push(q.minus(&xe).plus(&Lmi::constant(rho.matrix().clone())));
                    sdp.lin.push(LinIneq::constant(epsilon).plus(&q.trace().scaled(-1.0)));
                    let d0 = rho.matrix() - embed(&x0c);
                    let d0 = Hermitian::from_parts(d0, rho.dims().to_vec());
                    let ev = d0.eig()?;
                    let pp = ev.map(|l| l.max(0.0) + kappa);
                    let qq = ev.map(|l| (-l).max(0.0) + kappa);
                    start_extra.extend(crate::optim::barrier::hermitian_coords(pp.matrix()));
                    start_extra.extend(crate::optim::barrier::hermitian_coords(qq.matrix()));
                }
                _ => {
                    let d0 = Hermitian::from_parts(rho.matrix() - embed(&x0c), rho.dims().to_vec());
                    let pp = d0.eig()?.map(|l| l.max(0.0) + kappa);
                    start_extra.extend(crate::optim::barrier::hermitian_coords(pp.matrix()));
                }
            }
            sdp.lin.push(LinIneq::constant(epsilon).plus(&p.trace().scaled(-1.0)));
        }
        Ball::Purified => {
            // F(ρ′,ρ) ≥ √(1−ε²) via [[ρ_s, Z], [Z†, ρ′]] ⪰ 0 and Re tr[Z V†W] + s ≥ f
            let sr = rho.eig()?;
            let (w, rs) = support_frame(&sr);
            let k = w.ncols();
            let size = k + r;
            let mut lmi = Lmi::constant(CMat::zeros(size, size));
            lmi.constant.view_mut((0, 0), (k, k)).copy_from(&rs);
            let xb = x.map(|a| {
                let mut out = CMat::zeros(size, size);
                out.view_mut((k, k), (r, r)).copy_from(a);
                out
            });
            lmi = lmi.plus(&xb);
            let c = &vt * &w; // r × k
            let mut fid = LinIneq::constant(-(1.0 - epsilon * epsilon).sqrt());
            let zoff = nvars;
            for i in 0..k {
                for j in 0..r {
                    let re_idx = zoff + 2 * (i * r + j);
                    let mut a = CMat::zeros(size, size);
                    a[(i, k + j)] = C64::new(1.0, 0.0);
                    a[(k + j, i)] = C64::new(1.0, 0.0);
                    let mut b = CMat::zeros(size, size);
                    b[(i, k + j)] = C64::new(0.0, 1.0);
                    b[(k + j, i)] = C64::new(0.0, -1.0);
                    lmi.coeffs.push((re_idx, a));
                    lmi.coeffs.push((re_idx + 1, b));
                    // Re(Z_ij C_ji)
                    fid.coeffs.push((re_idx, c[(j, i)].re));
                    fid.coeffs.push((re_idx + 1, -c[(j, i)].im));
                }
            }
            nvars += 2 * k * r;
            // start: Z = (1−δ) ρ_s W†V, with ρ′ = (1−δ)V†ρV + κI
            let delta = epsilon * epsilon / 4.0;
            x0c = &rho_c * C64::new(1.0 - delta, 0.0) + CMat::identity(r, r) * C64::new(kappa, 0.0);
            let z0 = (&rs * w.adjoint() * &v) * C64::new(1.0 - delta, 0.0);
            for i in 0..k {
                for j in 0..r {
                    start_extra.push(z0[(i, j)].re);
                    start_extra.push(z0[(i, j)].im);
                }
            }
            if 1.0 - rho_tr > 1e-12 {
                // generalized term √((1−tr ρ′)(1−tr ρ)) ≥ s as a 2×2 LMI
                let s_idx = nvars;
                nvars += 1;
                let one_minus = LinIneq::constant(1.0).plus(&x.trace().scaled(-1.0));
                let mut g = Lmi::constant(CMat::zeros(2, 2));
                g.constant[(0, 0)] = C64::new(one_minus.constant, 0.0);
                g.constant[(1, 1)] = C64::new(1.0 - rho_tr, 0.0);
                for (i, a) in &one_minus.coeffs {
                    let mut m = CMat::zeros(2, 2);
                    m[(0, 0)] = C64::new(*a, 0.0);
                    g.coeffs.push((*i, m));
                }
                let mut m = CMat::zeros(2, 2);
                m[(0, 1)] = C64::new(1.0, 0.0);
                m[(1, 0)] = C64::new(1.0, 0.0);
                g.coeffs.push((s_idx, m));
                sdp.lmis.push(g);
                fid.coeffs.push((s_idx, 1.0));
                start_extra.push(0.0);
            }
            sdp.lmis.push(lmi);
            sdp.lin.push(fid);
        }
    }
    sdp.nvars = nvars;
    sdp.objective = vec![0.0; nvars];
    sdp.objective[0] = 1.0;

    // t large enough for strict feasibility
    let sc_inv_half = CMat::from_diagonal(&sc.diagonal().map(|z| C64::new(1.0 / z.re.sqrt(), 0.0)));
    let y = &sc_inv_half * &x0c * &sc_inv_half;
    let t_needed = Hermitian::from_parts(y, vec![r]).max_eigenvalue()?;
    let mut x0 = vec![2.0 * t_needed + 1.0];
    let xc = crate::optim::barrier::hermitian_coords(&x0c);
    if ball == Ball::TraceNormalized {
        x0.extend(xc.iter().enumerate().filter(|(i, _)| *i != r - 1).map(|(_, v)| *v));
    } else {
        x0.extend(xc);
    }
    x0.extend(start_extra);

    if !sdp.is_strictly_feasible(&x0) {
        // the ball does not reach far enough into supp σ for our start point
        let mut res = DivergenceResult::infinite_support();
        res.residual = support_leak(&rho, &ss);
        return Ok(res);
    }
    let sol = sdp.solve(x0, SdpOptions { gap_tol: 1e-11, ..SdpOptions::default() })?;
    let t = sol.x[0];
    let xm = x.eval(&sol.x);
    let witness = Hermitian::from_parts(embed(&xm), rho.dims().to_vec());
    Ok(DivergenceResult {
        value: Value::Finite(t.log2()),
        witness: Some(witness),
        scalar: Some(t),
        iterations: sol.newton_steps,
        residual: sol.gap,
        support_violation: false,
    })
}

/// Binary test 0 ≤ M ≤ I with its error records.
#[derive(Clone, Debug)]
pub struct TestOperator {
    pub m: Hermitian,
    /// tr[ρ(I−M)] (sup over the tested ρ for composite tests)
    pub type1: f64,
    /// tr[σM] (sup over the tested σ)
    pub type2: f64,
}

impl TestOperator {
    /// Validates 0 ≤ M ≤ I at 1e-9 and records the errors against `rhos`
    /// and `sigmas`.
    pub fn new(m: Hermitian, rhos: &[&Hermitian], sigmas: &[&Hermitian]) -> Result<Self> {
        let ev = m.eigenvalues()?;
        let (lo, hi) = (ev[0], *ev.last().unwrap());
        if lo < -1e-9 || hi > 1.0 + 1e-9 {
            return Err(Error::param("test eigenvalue", if lo < -1e-9 { lo } else { hi }, "must lie in [0,1]"));
        }
        let type1 = rhos.iter().map(|r| r.trace() - r.inner(&m)).fold(0.0, f64::max);
        let type2 = sigmas.iter().map(|s| s.inner(&m)).fold(0.0, f64::max);
        Ok(Self { m, type1, type2 })
    }
}

#[derive(Clone, Debug)]
pub struct Hypothesis {
    /// β_ε(ρ‖σ), from the dual formula.
    pub beta: f64,
    pub dh: Value,
    /// Optimal dual threshold; 0 when a special case applies.
    pub x_star: f64,
    pub test: TestOperator,
    /// |tr[σM] − β|
    pub residual: f64,
}

/// β and derivative data of x ↦ tr(xρ − σ)₊ at a threshold x.
fn positive_part_at(x: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<(Spectral, f64, f64)> {
    let sp = rho.scale(x).sub(sigma).eig()?;
    let pos: f64 = sp.values.iter().map(|v| v.max(0.0)).sum();
    let m = sp.to_eigenbasis(rho);
    let slope: f64 = (0..sp.dim()).filter(|&i| sp.values[i] > 0.0).map(|i| m[(i, i)].re).sum();
    Ok((sp, pos, slope))
}

/// Neyman–Pearson test from the eigenbasis of xρ − σ: eigenvectors are taken
/// in decreasing eigenvalue order until tr[ρM] reaches `target`, the last one
/// with a fractional weight.
fn neyman_pearson(sp: &Spectral, rho: &Hermitian, target: f64) -> Hermitian {
    let n = sp.dim();
    let m = sp.to_eigenbasis(rho);
    let mut weights = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        let w = m[(i, i)].re.max(0.0);
        if acc + w <= target {
            weights[i] = 1.0;
            acc += w;
        } else {
            if w > 0.0 {
                weights[i] = ((target - acc) / w).clamp(0.0, 1.0);
            }
            break;
        }
    }
    let mut scaled = sp.vectors.clone();
    for (c, w) in weights.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= C64::new(*w, 0.0);
        }
    }
    Hermitian::from_parts(scaled * sp.vectors.adjoint(), sp.dims().to_vec())
}

/// β_ε(ρ‖σ) = min{tr σM : tr ρ(I−M) ≤ ε} through its dual
/// max_{x≥0} x(1−ε) − tr(xρ − σ)₊, and D_H,ε = −log β.
pub fn beta_and_dhypo(epsilon: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<Hypothesis> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param("epsilon", epsilon, "must lie in [0,1]"));
    }
    let (rho, sigma) = check_pair(rho, sigma)?;
    let n = rho.dims().to_vec();
    let dh = |b: f64| if b > 0.0 { Value::Finite(-b.log2()) } else { Value::Infinite };
    let finish = |m: Hermitian, beta: f64, x: f64| -> Result<Hypothesis> {
        let test = TestOperator::new(m, &[&rho], &[&sigma])?;
        let residual = (test.type2 - beta).abs();
        Ok(Hypothesis { beta, dh: dh(beta), x_star: x, test, residual })
    };
    if epsilon == 1.0 {
        return finish(Hermitian::zeros(&n), 0.0, 0.0);
    }
    let ss = sigma.eig()?;
    if epsilon == 0.0 {
        let p = rho.support_projector()?;
        let beta = p.inner(&sigma);
        return finish(p, beta, 0.0);
    }
    let target = 1.0 - epsilon;
    if support_leak(&rho, &ss) >= target {
        // reject on the kernel of σ alone
        let m = ss.map(|v| if v > ss.floor() { 0.0 } else { 1.0 });
        return finish(m, 0.0, 0.0);
    }
    // x* solves tr[ρ P₊(xρ − σ)] = 1 − ε, monotone in x
    let above = |lx: f64| -> bool { positive_part_at(lx.exp(), &rho, &sigma).map(|r| r.2 >= target).unwrap_or(true) };
    let (mut lo, mut hi) = (1e-6f64.ln(), 1e6f64.ln());
    if above(lo) {
        lo = 1e-12f64.ln();
    }
    if !above(hi) {
        hi = 1e12f64.ln();
    }
    if above(lo) || !above(hi) {
        return Err(Error::NonConvergence { what: "hypothesis-testing threshold bracket", iterations: 2, residual: epsilon });
    }
    let (lo, hi) = bisect(above, lo, hi, 200);
    // the dual is concave; take the better endpoint
    let mut best: Option<(f64, f64, Spectral)> = None;
    for lx in [lo, hi] {
        let x = lx.exp();
        let (sp, pos, _) = positive_part_at(x, &rho, &sigma)?;
        let g = x * target - pos;
        if best.as_ref().is_none_or(|b| g > b.0) {
            best = Some((g, x, sp));
        }
    }
    let (beta, x, sp) = best.unwrap();
    let beta = beta.max(0.0);
    let m = neyman_pearson(&sp, &rho, target * rho.trace());
    finish(m, beta, x)
}

/// Nussbaum–Szkoła pair: P(i,j) = p_i |⟨u_i|v_j⟩|², Q(i,j) = q_j |⟨u_i|v_j⟩|²,
/// flattened row-major in (i, j).
pub fn ns_distributions(rho: &Hermitian, sigma: &Hermitian) -> Result<(Vec<f64>, Vec<f64>)> {
    let (rho, sigma) = check_pair(rho, sigma)?;
    let (sr, ss) = (rho.eig()?, sigma.eig()?);
    let overlap = sr.vectors.adjoint() * &ss.vectors;
    let n = rho.dim();
    let mut p = Vec::with_capacity(n * n);
    let mut q = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let o = overlap[(i, j)].norm_sqr();
            p.push(sr.values[i].max(0.0) * o);
            q.push(ss.values[j].max(0.0) * o);
        }
    }
    Ok((p, q))
}

/// Classical Rényi divergence of a probability vector against a nonnegative
/// vector, in bits.
pub fn classical_renyi(alpha: f64, p: &[f64], q: &[f64]) -> Result<Value> {
    check_alpha(alpha)?;
    if alpha > 1.0 && p.iter().zip(q).any(|(a, b)| *a > 0.0 && *b <= 0.0) {
        return Ok(Value::Infinite);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
        .sum();
    Ok(renyi_from_q(alpha, s))
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityEnvelope {
    pub alpha: f64,
    /// η of the regime selected by α (below or above 1).
    pub eta: f64,
    pub window: (f64, f64),
    pub window_ok: bool,
    /// α < 1: D − D_Petz,α; α > 1: D_Sand,α − D.
    pub gap: f64,
    /// (1−α)(log η)² or (α−1)(log η)².
    pub bound: f64,
    /// α < 1 only: D − D_Sand,α against (1−α)((log η)² + D + log tr σ).
    pub sandwiched_gap: Option<f64>,
    pub sandwiched_bound: Option<f64>,
    /// Whether the asserted inequalities hold (vacuously true outside the window).
    pub holds: bool,
}

/// Continuity of the Rényi divergences at α = 1 with the explicit η of
/// the two one-sided bounds; `window_ok` false means nothing is asserted.
pub fn continuity_envelopes(rho: &Hermitian, sigma: &Hermitian, alpha: f64) -> Result<ContinuityEnvelope> {
    check_alpha(alpha)?;
    let d = umegaki(rho, sigma)?.value;
    let p32 = petz(1.5, rho, sigma)?.value;
    let p12 = petz(0.5, rho, sigma)?.value;
    let (Value::Finite(d), Value::Finite(p32), Value::Finite(p12)) = (d, p32, p12) else {
        return Ok(ContinuityEnvelope {
            alpha,
            eta: f64::INFINITY,
            window: (1.0, 1.0),
            window_ok: false,
            gap: f64::NAN,
            bound: f64::INFINITY,
            sandwiched_gap: None,
            sandwiched_bound: None,
            holds: true,
        });
    };
    let below = alpha < 1.0;
    let k = if below { 2.0 } else { 1.0 };
    let root = f64::max(4.0, 2f64.powf(k * p32) + 2f64.powf(-k * p12) + 1.0);
    let eta = root * root;
    let le = eta.log2();
    let window = if below { (1.0 - 1.0 / le, 1.0) } else { (1.0, 1.0 + 1.0 / le) };
    let window_ok = alpha > window.0 && alpha < window.1;
    let slack = 1e-12;
    if below {
        let gap = d - petz(alpha, rho, sigma)?.value.to_f64();
        let bound = (1.0 - alpha) * le * le;
        let sg = d - sandwiched(alpha, rho, sigma)?.value.to_f64();
        let sb = (1.0 - alpha) * (le * le + d + sigma.trace().log2());
        let holds = !window_ok || (gap >= -slack && gap <= bound + slack && sg >= -slack && sg <= sb + slack);
        Ok(ContinuityEnvelope {
            alpha,
            eta,
            window,
            window_ok,
            gap,
            bound,
            sandwiched_gap: Some(sg),
            sandwiched_bound: Some(sb),
            holds,
        })
    } else {
        let gap = sandwiched(alpha, rho, sigma)?.value.to_f64() - d;
        let bound = (alpha - 1.0) * le * le;
        let holds = !window_ok || gap <= bound + slack;
        Ok(ContinuityEnvelope { alpha, eta, window, window_ok, gap, bound, sandwiched_gap: None, sandwiched_bound: None, holds })
    }
}

/// Right-hand side of D_Sand,α ≥ α·D_Petz,α + (1−α)(log tr ρ − log tr σ),
/// α ∈ (0,1), evaluated verbatim (subnormalized inputs included).
pub fn sandwiched_floor_from_petz(alpha: f64, rho: &Hermitian, sigma: &Hermitian) -> Result<Value> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", alpha, "must lie in (0,1)"));
    }
    let p = petz(alpha, rho, sigma)?.value;
    Ok(p.map(|p| alpha * p + (1.0 - alpha) * (rho.trace().log2() - sigma.trace().log2())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn kl(p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).log2()).sum()
    }

    #[test]
    fn umegaki_matches_classical_kl() {
        let r = umegaki(&Hermitian::diag(&[0.5, 0.5]), &Hermitian::diag(&[0.25, 0.75])).unwrap();
        assert!((r.value.unwrap() - kl(&[0.5, 0.5], &[0.25, 0.75])).abs() < 1e-12);
    }

    #[test]
    fn umegaki_outside_support_is_infinite() {
        let r = umegaki(&Hermitian::diag(&[0.5, 0.5]), &Hermitian::diag(&[1.0, 0.0])).unwrap();
        assert_eq!(r.value, Value::Infinite);
        assert!(r.support_violation);
    }

    #[test]
    fn petz_half_on_zero_and_plus() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = Hermitian::pure_real(&[1.0, 0.0]);
        let plus = Hermitian::pure_real(&[s, s]);
        let r = petz(0.5, &zero, &plus).unwrap();
        assert!((r.value.unwrap() - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn dmin_and_dmax_closed_forms() {
        let zero = Hermitian::pure_real(&[1.0, 0.0]);
        let sigma = Hermitian::diag(&[0.3, 0.7]);
        assert!((dmin(&zero, &sigma).unwrap().value.unwrap() + 0.3f64.log2()).abs() < 1e-12);
        let rho = Hermitian::diag(&[0.6, 0.4]);
        let want = (0.6f64 / 0.3).log2();
        assert!((dmax(&rho, &sigma).unwrap().value.unwrap() - want).abs() < 1e-12);
        assert!((dmax(&rho, &Hermitian::identity(&[2])).unwrap().value.unwrap() - 0.6f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn beta_for_identical_states() {
        let mut g = random::rng(5);
        let rho = random::density(3, &mut g);
        let h = beta_and_dhypo(0.2, &rho, &rho).unwrap();
        assert!((h.beta - 0.8).abs() < 1e-9, "{}", h.beta);
        assert!(h.residual < 1e-8);
        assert!((h.test.type1 - 0.2).abs() < 1e-9);
    }

    #[test]
    fn beta_edge_cases() {
        let rho = Hermitian::diag(&[0.5, 0.5]);
        let sigma = Hermitian::diag(&[0.2, 0.8]);
        assert_eq!(beta_and_dhypo(1.0, &rho, &sigma).unwrap().dh, Value::Infinite);
        let b0 = beta_and_dhypo(0.0, &Hermitian::diag(&[1.0, 0.0]), &sigma).unwrap();
        assert!((b0.beta - 0.2).abs() < 1e-12);
        let orth = beta_and_dhypo(0.3, &Hermitian::diag(&[0.0, 1.0]), &Hermitian::diag(&[1.0, 0.0])).unwrap();
        assert_eq!(orth.beta, 0.0);
    }

    #[test]
    fn smoothed_dmax_is_below_dmax() {
        let mut g = random::rng(11);
        for ball in [Ball::Purified, Ball::Trace, Ball::TraceNormalized] {
            let rho = random::density(2, &mut g);
            let sigma = random::density(2, &mut g);
            let full = dmax(&rho, &sigma).unwrap().value.unwrap();
            let sm = dmax_smoothed(0.1, &rho, &sigma, ball).unwrap();
            assert!(sm.value.unwrap() <= full + 1e-6, "{ball:?} {} > {full}", sm.value);
        }
    }

    #[test]
    fn smoothed_dmax_trace_ball_on_identical_states() {
        let rho = Hermitian::diag(&[0.7, 0.3]);
        let r = dmax_smoothed(0.2, &rho, &rho, Ball::Trace).unwrap().value.unwrap();
        // ρ′ = (1−ε)ρ is optimal for a trace ball around σ = ρ
        assert!((r - 0.8f64.log2()).abs() < 1e-6, "{r}");
    }

    #[test]
    fn ns_marginal_sums_to_trace() {
        let mut g = random::rng(9);
        let (p, q) = ns_distributions(&random::density(3, &mut g), &random::density(3, &mut g)).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
