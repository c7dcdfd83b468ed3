//! Small dense log-barrier method for linear objectives under linear matrix
//! inequalities A(x) = A₀ + Σᵢ xᵢAᵢ ⪰ 0 and scalar inequalities
//! c₀ + Σᵢ aᵢxᵢ ≥ 0.

use crate::error::{Error, Result};
use crate::hermitian::{CMat, C64};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Clone, Debug)]
pub struct Lmi {
    pub constant: CMat,
    /// Sparse list of (variable index, coefficient matrix).
    pub coeffs: Vec<(usize, CMat)>,
}

#[derive(Clone, Debug)]
pub struct LinIneq {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct Sdp {
    pub nvars: usize,
    /// Minimized objective c·x.
    pub objective: Vec<f64>,
    pub lmis: Vec<Lmi>,
    pub lin: Vec<LinIneq>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// Target for the barrier duality-gap bound m/τ.
    pub gap_tol: f64,
    pub max_newton: usize,
    pub mu: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-10, max_newton: 4000, mu: 10.0 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    /// Central-path dual matrices A_b(x)⁻¹/τ.
    pub lmi_duals: Vec<CMat>,
    /// Central-path multipliers 1/(τ s_l).
    pub lin_duals: Vec<f64>,
    pub newton_steps: usize,
}

/// An `Lmi` doubles as an affine Hermitian expression of the variables; the
/// constraint it imposes when added to an [`Sdp`] is `expr ⪰ 0`.
impl Lmi {
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for (i, a) in &self.coeffs {
            m += a * C64::new(x[*i], 0.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn constant(c: CMat) -> Self {
        Self { constant: c, coeffs: Vec::new() }
    }

    /// A free Hermitian n×n variable occupying n² coordinates from `offset`.
    pub fn var(n: usize, offset: usize) -> Self {
        Self { constant: CMat::zeros(n, n), coeffs: hermitian_basis(n, offset) }
    }

    /// A Hermitian n×n variable with unit trace, using n² − 1 coordinates
    /// from `offset` (the last diagonal entry is eliminated).
    pub fn var_trace_one(n: usize, offset: usize) -> Self {
        let mut constant = CMat::zeros(n, n);
        constant[(n - 1, n - 1)] = C64::new(1.0, 0.0);
        let mut coeffs = Vec::with_capacity(n * n - 1);
        for (k, b) in hermitian_basis(n, 0) {
            if k == n - 1 {
                continue;
            }
            let mut b = b;
            if k < n - 1 {
                b[(n - 1, n - 1)] = C64::new(-1.0, 0.0);
            }
            let idx = if k < n - 1 { k } else { k - 1 };
            coeffs.push((offset + idx, b));
        }
        Self { constant, coeffs }
    }

    /// Applies a linear map to the expression.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self { constant: f(&self.constant), coeffs: self.coeffs.iter().map(|(i, a)| (*i, f(a))).collect() }
    }

    pub fn plus(&self, other: &Lmi) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (j, b) in &other.coeffs {
            match coeffs.iter_mut().find(|(i, _)| i == j) {
                Some((_, a)) => *a += b,
                None => coeffs.push((*j, b.clone())),
            }
        }
        Self { constant: &self.constant + &other.constant, coeffs }
    }

    pub fn scaled(&self, t: f64) -> Self {
        let t = C64::new(t, 0.0);
        self.map(|a| a * t)
    }

    pub fn minus(&self, other: &Lmi) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Real affine functional tr[C·expr].
    pub fn inner(&self, c: &CMat) -> LinIneq {
        let ip = |a: &CMat| c.iter().zip(a.transpose().iter()).map(|(p, q)| (p * q).re).sum::<f64>();
        LinIneq { constant: ip(&self.constant), coeffs: self.coeffs.iter().map(|(i, a)| (*i, ip(a))).collect() }
    }

    pub fn trace(&self) -> LinIneq {
        let n = self.size();
        self.inner(&CMat::identity(n, n))
    }

    /// Block-diagonal embedding [[self, 0], [0, other]].
    pub fn block_diag(&self, other: &Lmi) -> Self {
        let (n, m) = (self.size(), other.size());
        let embed = |a: &CMat, off: usize| {
            let mut out = CMat::zeros(n + m, n + m);
            out.view_mut((off, off), (a.nrows(), a.nrows())).copy_from(a);
            out
        };
        self.map(|a| embed(a, 0)).plus(&other.map(|a| embed(a, n)))
    }
}

impl LinIneq {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|(i, a)| a * x[*i]).sum::<f64>()
    }

    pub fn constant(c: f64) -> Self {
        Self { constant: c, coeffs: Vec::new() }
    }

    pub fn plus(&self, other: &LinIneq) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (j, b) in &other.coeffs {
            match coeffs.iter_mut().find(|(i, _)| i == j) {
                Some((_, a)) => *a += b,
                None => coeffs.push((*j, *b)),
            }
        }
        Self { constant: self.constant + other.constant, coeffs }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { constant: t * self.constant, coeffs: self.coeffs.iter().map(|(i, a)| (*i, t * a)).collect() }
    }

    /// Dense objective vector (the constant is dropped).
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (i, a) in &self.coeffs {
            v[*i] += a;
        }
        v
    }
}

fn chol(m: CMat) -> Option<Cholesky<C64, Dyn>> {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let c = Cholesky::new(h)?;
    // complex sqrt does not reject negative pivots
    let l = c.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(c)
}

impl Sdp {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, objective: vec![0.0; nvars], lmis: Vec::new(), lin: Vec::new() }
    }

    fn barrier_size(&self) -> f64 {
        (self.lmis.iter().map(|l| l.constant.nrows()).sum::<usize>() + self.lin.len()) as f64
    }

    /// τ c·x − Σ log det A_b − Σ log s_l, or None outside the interior.
    fn phi(&self, x: &[f64], tau: f64) -> Option<f64> {
        let mut v = tau * dot(&self.objective, x);
        for l in &self.lmis {
            let c = chol(l.eval(x))?;
            let ld: f64 = (0..c.l_dirty().nrows()).map(|i| c.l_dirty()[(i, i)].re.ln()).sum();
            v -= 2.0 * ld;
        }
        for l in &self.lin {
            let s = l.eval(x);
            if s <= 0.0 {
                return None;
            }
            v -= s.ln();
        }
        Some(v)
    }

    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        self.phi(x, 0.0).is_some()
    }

    fn grad_hess(&self, x: &[f64], tau: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.nvars;
        let mut g = DVector::from_iterator(n, self.objective.iter().map(|c| tau * c));
        let mut h = DMatrix::<f64>::zeros(n, n);
        for l in &self.lmis {
            let c = chol(l.eval(x))?;
            let lo = c.l();
            // G_i = L⁻¹ A_i L⁻†
            let gs: Vec<(usize, CMat)> = l
                .coeffs
                .iter()
                .map(|(i, a)| {
                    let y = lo.solve_lower_triangular(a).expect("nonsingular factor");
                    let z = lo.solve_lower_triangular(&y.adjoint()).expect("nonsingular factor");
                    (*i, z.adjoint())
                })
                .collect();
            for (a, (i, gi)) in gs.iter().enumerate() {
                let tr: f64 = (0..gi.nrows()).map(|p| gi[(p, p)].re).sum();
                g[*i] -= tr;
                for (b, (j, gj)) in gs.iter().enumerate().skip(a) {
                    let v: f64 = gi.iter().zip(gj.iter()).map(|(p, q)| (p * q.conj()).re).sum();
                    h[(*i, *j)] += v;
                    if a != b {
                        h[(*j, *i)] += v;
                    }
                }
            }
        }
        for l in &self.lin {
            let s = l.eval(x);
            if s <= 0.0 {
                return None;
            }
            for (i, a) in &l.coeffs {
                g[*i] -= a / s;
                for (j, b) in &l.coeffs {
                    h[(*i, *j)] += a * b / (s * s);
                }
            }
        }
        Some((g, h))
    }

    fn duals(&self, x: &[f64], tau: f64) -> (Vec<CMat>, Vec<f64>) {
        let lmi = self
            .lmis
            .iter()
            .map(|l| {
                let n = l.constant.nrows();
                let inv = chol(l.eval(x)).map(|c| c.inverse()).unwrap_or_else(|| CMat::zeros(n, n));
                inv / C64::new(tau, 0.0)
            })
            .collect();
        let lin = self.lin.iter().map(|l| 1.0 / (tau * l.eval(x))).collect();
        (lmi, lin)
    }

    /// Path-following barrier method from a strictly feasible `x0`.
    pub fn solve(&self, x0: Vec<f64>, opts: SdpOptions) -> Result<SdpSolution> {
        if x0.len() != self.nvars {
            return Err(Error::Dimension(format!("start point has {} entries, expected {}", x0.len(), self.nvars)));
        }
        if !self.is_strictly_feasible(&x0) {
            return Err(Error::Config("barrier start point is not strictly feasible".into()));
        }
        let m = self.barrier_size();
        let mut x = x0;
        let mut tau = 1.0;
        let mut steps = 0;
        loop {
            // centering
            loop {
                if steps >= opts.max_newton {
                    return Err(Error::NonConvergence { what: "barrier method", iterations: steps, residual: m / tau });
                }
                steps += 1;
                let (g, h) = self.grad_hess(&x, tau).expect("iterate stays interior");
                let scale = (0..self.nvars).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
                let mut reg = 1e-14 * scale;
                let delta = loop {
                    let hr = &h + DMatrix::<f64>::identity(self.nvars, self.nvars) * reg;
                    if let Some(c) = hr.cholesky() {
                        break c.solve(&(-&g));
                    }
                    reg *= 100.0;
                    if reg > scale * 1e6 {
                        return Err(Error::NonConvergence { what: "barrier Newton system", iterations: steps, residual: reg });
                    }
                };
                let dec2 = -g.dot(&delta);
                let f0 = self.phi(&x, tau).expect("interior");
                // below the decrement threshold or the roundoff level of phi
                if dec2 / 2.0 <= 1e-11 || dec2 <= 1e-13 * f0.abs() {
                    break;
                }
                let mut t = 1.0;
                let mut moved = false;
                for _ in 0..80 {
                    let xn: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
                    if xn == x {
                        break;
                    }
                    if let Some(fv) = self.phi(&xn, tau) {
                        if fv <= f0 - 0.25 * t * dec2 {
                            x = xn;
                            moved = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            if m / tau <= opts.gap_tol {
                break;
            }
            tau *= opts.mu;
        }
        let (lmi_duals, lin_duals) = self.duals(&x, tau);
        Ok(SdpSolution { value: dot(&self.objective, &x), x, gap: m / tau, lmi_duals, lin_duals, newton_steps: steps })
    }
}

/// Incremental construction of an [`Sdp`] together with its start point,
/// with optional linear equality constraints that are eliminated before
/// solving.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub sdp: Sdp,
    pub start: Vec<f64>,
    /// Constraints `expr = 0`.
    pub eq: Vec<LinIneq>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nvars(&self) -> usize {
        self.sdp.nvars
    }

    /// Appends variables with the given start values; returns their offset.
    pub fn alloc(&mut self, start: &[f64]) -> usize {
        let off = self.sdp.nvars;
        self.sdp.nvars += start.len();
        self.sdp.objective.resize(self.sdp.nvars, 0.0);
        self.start.extend_from_slice(start);
        off
    }

    pub fn lmi(&mut self, l: Lmi) {
        self.sdp.lmis.push(l);
    }

    pub fn lin(&mut self, l: LinIneq) {
        self.sdp.lin.push(l);
    }

    pub fn eq(&mut self, l: LinIneq) {
        self.eq.push(l);
    }

    pub fn minimize(&mut self, objective: &LinIneq) {
        self.sdp.objective = objective.dense(self.sdp.nvars);
    }

    pub fn is_strictly_feasible(&self) -> bool {
        self.sdp.is_strictly_feasible(&self.start)
    }

    pub fn solve(&self, opts: SdpOptions) -> Result<SdpSolution> {
        if self.eq.is_empty() {
            return self.sdp.solve(self.start.clone(), opts);
        }
        let n = self.sdp.nvars;
        let x0 = &self.start;
        let resid = self.eq.iter().map(|e| e.eval(x0).abs()).fold(0.0, f64::max);
        if resid > 1e-9 {
            return Err(Error::Config(format!("start point violates an equality constraint by {resid:e}")));
        }
        // null space of the equality rows
        let mut ete = DMatrix::<f64>::zeros(n, n);
        for e in &self.eq {
            let row = e.dense(n);
            for i in 0..n {
                if row[i] != 0.0 {
                    for j in 0..n {
                        ete[(i, j)] += row[i] * row[j];
                    }
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(ete);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let basis: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k].abs() <= 1e-12 * top.max(1e-300)).collect();
        let nz = basis.len();
        let null = DMatrix::<f64>::from_fn(n, nz, |i, k| eig.eigenvectors[(i, basis[k])]);
        let reduce_lmi = |l: &Lmi| -> Lmi {
            let constant = l.eval(x0);
            let dim = l.size();
            let coeffs = (0..nz)
                .filter_map(|k| {
                    let mut m = CMat::zeros(dim, dim);
                    let mut any = false;
                    for (i, a) in &l.coeffs {
                        let w = null[(*i, k)];
                        if w.abs() > 1e-15 {
                            m += a * C64::new(w, 0.0);
                            any = true;
                        }
                    }
                    any.then_some((k, m))
                })
                .collect();
            Lmi { constant, coeffs }
        };
        let reduce_lin = |l: &LinIneq| -> LinIneq {
            let row = l.dense(n);
            let coeffs = (0..nz)
                .map(|k| (k, (0..n).map(|i| row[i] * null[(i, k)]).sum::<f64>()))
                .filter(|(_, a)| a.abs() > 1e-15)
                .collect();
            LinIneq { constant: l.eval(x0), coeffs }
        };
        let reduced = Sdp {
            nvars: nz,
            objective: (0..nz).map(|k| (0..n).map(|i| self.sdp.objective[i] * null[(i, k)]).sum()).collect(),
            lmis: self.sdp.lmis.iter().map(reduce_lmi).collect(),
            lin: self.sdp.lin.iter().map(reduce_lin).collect(),
        };
        let sol = reduced.solve(vec![0.0; nz], opts)?;
        let x: Vec<f64> = (0..n).map(|i| x0[i] + (0..nz).map(|k| null[(i, k)] * sol.x[k]).sum::<f64>()).collect();
        Ok(SdpSolution { value: dot(&self.sdp.objective, &x), x, ..sol })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Basis of Hermitian n×n matrices for variables starting at `offset`:
/// diagonal units, then for each i<j the symmetric (E_ij + E_ji) and
/// antisymmetric (iE_ij − iE_ji) pair.
pub fn hermitian_basis(n: usize, offset: usize) -> Vec<(usize, CMat)> {
    let mut out = Vec::with_capacity(n * n);
    let mut k = offset;
    for i in 0..n {
        let mut e = CMat::zeros(n, n);
        e[(i, i)] = C64::new(1.0, 0.0);
        out.push((k, e));
        k += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut re = CMat::zeros(n, n);
            re[(i, j)] = C64::new(1.0, 0.0);
            re[(j, i)] = C64::new(1.0, 0.0);
            out.push((k, re));
            let mut im = CMat::zeros(n, n);
            im[(i, j)] = C64::new(0.0, 1.0);
            im[(j, i)] = C64::new(0.0, -1.0);
            out.push((k + 1, im));
            k += 2;
        }
    }
    out
}

/// Inverse of [`hermitian_coords`]: the matrix Σ x_k B_k.
pub fn hermitian_from_coords(x: &[f64], n: usize, offset: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    let mut k = offset;
    for i in 0..n {
        m[(i, i)] = C64::new(x[k], 0.0);
        k += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Coordinates of a Hermitian matrix in the [`hermitian_basis`].
pub fn hermitian_coords(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

/// Applies a linear map to each basis element of a Hermitian variable block,
/// producing LMI coefficients.
pub fn mapped_basis(n: usize, offset: usize, f: impl Fn(&CMat) -> CMat) -> Vec<(usize, CMat)> {
    hermitian_basis(n, offset).into_iter().map(|(k, b)| (k, f(&b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_eigenvalue_as_sdp() {
        // minimize t subject to t·I − X ⪰ 0
        let x = CMat::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
        let mut p = Sdp::new(1);
        p.objective[0] = 1.0;
        p.lmis.push(Lmi { constant: -x.clone(), coeffs: vec![(0, CMat::identity(2, 2))] });
        let sol = p.solve(vec![10.0], SdpOptions::default()).unwrap();
        let expected = 1.5 + (0.25f64 + 1.0).sqrt();
        assert!((sol.value - expected).abs() < 1e-8, "{}", sol.value);
    }

    #[test]
    fn equality_constraints_are_eliminated() {
        // minimize x0 subject to x0 + x1 = 1, x1 ≤ 0.75, x0 ≥ 0
        let mut m = Model::new();
        let off = m.alloc(&[0.5, 0.5]);
        m.lin(LinIneq { constant: 0.75, coeffs: vec![(off + 1, -1.0)] });
        m.lin(LinIneq { constant: 0.0, coeffs: vec![(off, 1.0)] });
        m.eq(LinIneq { constant: -1.0, coeffs: vec![(off, 1.0), (off + 1, 1.0)] });
        m.minimize(&LinIneq { constant: 0.0, coeffs: vec![(off, 1.0)] });
        let sol = m.solve(SdpOptions::default()).unwrap();
        assert!((sol.x[0] - 0.25).abs() < 1e-8 && (sol.x[0] + sol.x[1] - 1.0).abs() < 1e-12, "{:?}", sol.x);
    }

    #[test]
    fn trace_one_block_has_unit_trace() {
        let e = Lmi::var_trace_one(3, 2);
        assert_eq!(e.coeffs.len(), 8);
        let x: Vec<f64> = (0..10).map(|k| (k as f64).sin()).collect();
        let m = e.eval(&x);
        let tr: f64 = (0..3).map(|i| m[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-14);
        assert!((e.trace().eval(&x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coordinates_round_trip() {
        let x: Vec<f64> = (0..9).map(|k| k as f64 * 0.3 - 1.0).collect();
        let m = hermitian_from_coords(&x, 3, 0);
        assert_eq!(hermitian_coords(&m), x);
        let mut s = CMat::zeros(3, 3);
        for (k, b) in hermitian_basis(3, 0) {
            s += b * C64::new(x[k], 0.0);
        }
        assert!((s - m).norm() < 1e-14);
    }
}
