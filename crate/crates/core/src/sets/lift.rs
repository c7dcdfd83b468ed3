//! Conic descriptions of each kind for the barrier solver, and smoothed
//! support functions for the first-order solvers.

use super::{adjoint, apply, embed_conditional, Kind, StateSet};
use crate::error::Result;
use crate::hermitian::{CMat, Hermitian, C64};
use crate::optim::barrier::{hermitian_coords, LinIneq, Lmi, Model};

/// Y ∈ cone(S) as an affine expression, with the scale t(Y) such that
/// Y/t(Y) ∈ S.
pub(crate) struct Lift {
    pub y: Lmi,
    pub scale: LinIneq,
    /// Value of `scale` at the start point.
    pub start_scale: f64,
}

fn var(i: usize) -> LinIneq {
    LinIneq { constant: 0.0, coeffs: vec![(i, 1.0)] }
}

fn sum_vars(off: usize, k: usize) -> LinIneq {
    LinIneq { constant: 0.0, coeffs: (off..off + k).map(|i| (i, 1.0)).collect() }
}

/// s·I as a matrix expression.
pub(crate) fn times_identity(s: &LinIneq, n: usize) -> Lmi {
    let id = CMat::identity(n, n);
    Lmi {
        constant: &id * C64::new(s.constant, 0.0),
        coeffs: s.coeffs.iter().map(|(i, a)| (*i, &id * C64::new(*a, 0.0))).collect(),
    }
}

fn scaled_identity_coords(n: usize, c: f64) -> Vec<f64> {
    hermitian_coords(&(CMat::identity(n, n) * C64::new(c, 0.0)))
}

fn unit(n: usize, i: usize) -> CMat {
    let mut e = CMat::zeros(n, n);
    e[(i, i)] = C64::new(1.0, 0.0);
    e
}

/// Numerically stable log-sum-exp at temperature μ and its softmax weights.
fn lse(v: &[f64], mu: f64) -> (f64, Vec<f64>) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| ((x - m) / mu).exp()).collect();
    let s: f64 = e.iter().sum();
    (m + mu * s.ln(), e.into_iter().map(|x| x / s).collect())
}

fn smoothed_top(z: &Hermitian, mu: f64) -> Result<(f64, Hermitian)> {
    let sp = z.eig()?;
    let (v, w) = lse(&sp.values, mu);
    let n = sp.values.len();
    let mut m = CMat::zeros(n, n);
    for (k, wk) in w.iter().enumerate() {
        if *wk > 0.0 {
            let col = sp.vectors.column(k);
            m += col * col.adjoint() * C64::new(*wk, 0.0);
        }
    }
    Ok((v, Hermitian::from_parts(m, z.dims().to_vec())))
}

impl StateSet {
    fn state_factors(&self, identity: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let keep: Vec<usize> = (0..self.dims.len()).filter(|&k| !identity[k]).collect();
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        (keep, dims)
    }

    /// Allocates a cone element in `m`, starting at c times a relative
    /// interior point with maximal support.
    pub(crate) fn cone_lift(&self, m: &mut Model, c: f64) -> Lift {
        let n = self.dim();
        let dims = self.dims.clone();
        let lift = match &self.kind {
            Kind::Singleton(r) => {
                let off = m.alloc(&[c]);
                m.lin(var(off));
                Lift { y: Lmi { constant: CMat::zeros(n, n), coeffs: vec![(off, r.matrix().clone())] }, scale: var(off), start_scale: 0.0 }
            }
            Kind::Hull(g) => {
                let k = g.len();
                let off = m.alloc(&vec![c / k as f64; k]);
                for i in 0..k {
                    m.lin(var(off + i));
                }
                let coeffs = g.iter().enumerate().map(|(i, x)| (off + i, x.matrix().clone())).collect();
                Lift { y: Lmi { constant: CMat::zeros(n, n), coeffs }, scale: sum_vars(off, k), start_scale: 0.0 }
            }
            Kind::Incoherent => {
                let off = m.alloc(&vec![c / n as f64; n]);
                for i in 0..n {
                    m.lin(var(off + i));
                }
                let coeffs = (0..n).map(|i| (off + i, unit(n, i))).collect();
                Lift { y: Lmi { constant: CMat::zeros(n, n), coeffs }, scale: sum_vars(off, n), start_scale: 0.0 }
            }
            Kind::Conditional { identity } => {
                let (_, bd) = self.state_factors(identity);
                let b: usize = bd.iter().product();
                let off = m.alloc(&scaled_identity_coords(b, c / b as f64));
                let z = Lmi::var(b, off);
                m.lmi(z.clone());
                let y = z.map(|x| {
                    let t = Hermitian::from_parts(x.clone(), bd.clone());
                    embed_conditional(&dims, identity, &t).expect("factors").into_matrix()
                });
                Lift { y, scale: z.trace(), start_scale: 0.0 }
            }
            Kind::ChannelImage { kraus, dims_in } => {
                let d: usize = dims_in.iter().product();
                let off = m.alloc(&scaled_identity_coords(d, c / d as f64));
                let z = Lmi::var(d, off);
                m.lmi(z.clone());
                let y = z.map(|x| apply(kraus, &Hermitian::from_parts(x.clone(), dims_in.clone()), &dims).into_matrix());
                Lift { y, scale: z.trace(), start_scale: 0.0 }
            }
            Kind::Rains { transposed } => {
                let subs: Vec<usize> = (0..dims.len()).filter(|&k| transposed[k]).collect();
                let pt = |x: &CMat| Hermitian::from_parts(x.clone(), dims.clone()).partial_transpose(&subs).expect("factors").into_matrix();
                let off_p = m.alloc(&scaled_identity_coords(n, 0.6 * c / n as f64));
                let off_q = m.alloc(&scaled_identity_coords(n, 0.2 * c / n as f64));
                let (p, q) = (Lmi::var(n, off_p), Lmi::var(n, off_q));
                let y = p.minus(&q).map(pt);
                m.lmi(p.clone());
                m.lmi(q.clone());
                m.lmi(y.clone());
                Lift { y, scale: p.trace().plus(&q.trace()), start_scale: 0.0 }
            }
            Kind::Mana { d } => {
                let ops = super::mana::phase_point_operators(*d, dims.len());
                let rho0 = CMat::identity(n, n) * C64::new(0.5 * c / n as f64, 0.0);
                let off = m.alloc(&hermitian_coords(&rho0));
                let y = Lmi::var(n, off);
                m.lmi(y.clone());
                let starts: Vec<f64> = ops.iter().map(|a| ((a * &rho0).trace().re / n as f64).abs() + 0.1 * c / (n * n) as f64).collect();
                let off_s = m.alloc(&starts);
                for (u, a) in ops.iter().enumerate() {
                    let w = y.inner(a).scaled(1.0 / n as f64);
                    m.lin(var(off_s + u).plus(&w.scaled(-1.0)));
                    m.lin(var(off_s + u).plus(&w));
                }
                Lift { y, scale: sum_vars(off_s, ops.len()), start_scale: 0.0 }
            }
        };
        let start_scale = lift.scale.eval(&m.start);
        Lift { start_scale, ..lift }
    }

    /// Adds constraints encoding h(X) ≤ s for affine X and s. Auxiliary
    /// variables start at z0·I.
    pub(crate) fn epigraph(&self, m: &mut Model, x: &Lmi, s: &LinIneq, z0: f64) {
        let n = self.dim();
        let dims = self.dims.clone();
        match &self.kind {
            Kind::Singleton(r) => m.lin(s.plus(&x.inner(r.matrix()).scaled(-1.0))),
            Kind::Hull(g) => {
                for r in g {
                    m.lin(s.plus(&x.inner(r.matrix()).scaled(-1.0)));
                }
            }
            Kind::Incoherent => {
                for i in 0..n {
                    m.lin(s.plus(&x.inner(&unit(n, i)).scaled(-1.0)));
                }
            }
            Kind::Conditional { identity } => {
                let (keep, bd) = self.state_factors(identity);
                let b: usize = bd.iter().product();
                let tr = x.map(|a| Hermitian::from_parts(a.clone(), dims.clone()).partial_trace(&keep).expect("factors").into_matrix());
                m.lmi(times_identity(s, b).minus(&tr));
            }
            Kind::ChannelImage { kraus, dims_in } => {
                let d: usize = dims_in.iter().product();
                let back = x.map(|a| adjoint(kraus, &Hermitian::from_parts(a.clone(), dims.clone()), dims_in).into_matrix());
                m.lmi(times_identity(s, d).minus(&back));
            }
            Kind::Rains { transposed } => {
                let subs: Vec<usize> = (0..dims.len()).filter(|&k| transposed[k]).collect();
                let pt = |a: &CMat| Hermitian::from_parts(a.clone(), dims.clone()).partial_transpose(&subs).expect("factors").into_matrix();
                let off = m.alloc(&scaled_identity_coords(n, z0));
                let z = Lmi::var(n, off);
                m.lmi(z.clone());
                let g = x.plus(&z).map(pt);
                let si = times_identity(s, n);
                m.lmi(si.minus(&g));
                m.lmi(si.plus(&g));
            }
            Kind::Mana { d } => {
                let ops = super::mana::phase_point_operators(*d, dims.len());
                let off = m.alloc(&scaled_identity_coords(n, z0));
                let z = Lmi::var(n, off);
                m.lmi(z.clone());
                let g = x.plus(&z);
                for a in &ops {
                    let c = g.inner(a);
                    m.lin(s.plus(&c.scaled(-1.0)));
                    m.lin(s.plus(&c));
                }
            }
        }
    }

    /// Upper approximation h_μ(Y) ≥ h(Y) by log-sum-exp smoothing of the
    /// closed-form support functions, with its gradient (a member of the
    /// set). `None` for kinds without a closed form.
    pub(crate) fn smoothed_max_linear(&self, y: &Hermitian, mu: f64) -> Result<Option<(f64, Hermitian)>> {
        let y = y.clone().with_dims(self.dims.clone())?;
        Ok(match &self.kind {
            Kind::Singleton(r) => Some((y.inner(r), r.clone())),
            Kind::Hull(g) => {
                let v: Vec<f64> = g.iter().map(|r| y.inner(r)).collect();
                let (val, w) = lse(&v, mu);
                let mut acc = Hermitian::zeros(&self.dims);
                for (r, wk) in g.iter().zip(&w) {
                    acc = acc.axpy(*wk, r);
                }
                Some((val, acc))
            }
            Kind::Incoherent => {
                let (val, w) = lse(&y.diagonal(), mu);
                Some((val, Hermitian::diag_with_dims(&w, self.dims.clone())?))
            }
            Kind::Conditional { identity } => {
                let (keep, _) = self.state_factors(identity);
                let (val, t) = smoothed_top(&y.partial_trace(&keep)?, mu)?;
                Some((val, embed_conditional(&self.dims, identity, &t)?))
            }
            Kind::ChannelImage { kraus, dims_in } => {
                let (val, t) = smoothed_top(&adjoint(kraus, &y, dims_in), mu)?;
                Some((val, apply(kraus, &t, &self.dims)))
            }
            Kind::Rains { .. } | Kind::Mana { .. } => None,
        })
    }

    pub(crate) fn has_smooth_support(&self) -> bool {
        !matches!(self.kind, Kind::Rains { .. } | Kind::Mana { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::barrier::SdpOptions;

    /// Minimizing t subject to h(X) ≤ t reproduces the support value.
    fn epigraph_value(s: &StateSet, x: &Hermitian) -> f64 {
        let mut m = Model::new();
        let top = s.max_linear(x).unwrap().value;
        let off = m.alloc(&[top.abs() * 2.0 + 2.0]);
        let t = var(off);
        s.epigraph(&mut m, &Lmi::constant(x.matrix().clone()), &t, 0.1);
        m.minimize(&t);
        m.solve(SdpOptions::default()).unwrap().value
    }

    #[test]
    fn epigraphs_match_support_functions() {
        let mut rng = crate::random::rng(3);
        let sets = [
            StateSet::conditional(2, 2).unwrap(),
            StateSet::incoherent(vec![2, 2]).unwrap(),
            StateSet::rains(2, 2).unwrap(),
        ];
        for s in &sets {
            let x = crate::random::hermitian(4, &mut rng).with_dims(vec![2, 2]).unwrap();
            let h = s.max_linear(&x).unwrap().value;
            assert!((epigraph_value(s, &x) - h).abs() < 1e-7, "{}: {} vs {h}", s.kind_name(), epigraph_value(s, &x));
        }
        let mana = StateSet::mana(3, 1).unwrap();
        let x = crate::random::hermitian(3, &mut rng);
        let h = mana.max_linear(&x).unwrap().value;
        assert!((epigraph_value(&mana, &x) - h).abs() < 1e-7);
    }

    #[test]
    fn smoothing_bounds_from_above() {
        let mut rng = crate::random::rng(5);
        let s = StateSet::conditional(2, 3).unwrap();
        let x = crate::random::hermitian(6, &mut rng).with_dims(vec![2, 3]).unwrap();
        let h = s.max_linear(&x).unwrap().value;
        for mu in [1e-1, 1e-3, 1e-6] {
            let (v, w) = s.smoothed_max_linear(&x, mu).unwrap().unwrap();
            assert!(v >= h - 1e-12 && v <= h + mu * 3f64.ln() + 1e-12);
            assert!(s.contains(&w, 1e-9).unwrap());
        }
    }
}
