//! Convex sets of positive semidefinite operators, exposed through support
//! functions h(X) = sup tr[Xρ], reverse support functions and membership.
//!
//! Each kind knows its own tensor composition, so an i.i.d. family of sets
//! is represented by the single-copy set and [`StateSet::tensor_power`].

mod json;
mod lift;
mod mana;
mod rains;
mod validate;

pub use json::{family_from_json, family_from_value, family_to_json, set_from_json, set_from_value, set_to_json};
pub use mana::{phase_point_operators, wigner, wigner_norm};
pub use validate::{validate_assumptions, AssumptionReport, Violation};

use crate::error::{Error, Result};
use crate::hermitian::{CMat, Hermitian, MAX_DIM};
use crate::optim::frank_wolfe::LinearOracle;
use crate::optim::{barrier, herm_to_vec, minnorm};
use nalgebra::DMatrix;


const MAX_KRAUS: usize = 4096;

#[derive(Clone, Debug)]
pub struct SupportValue {
    pub value: f64,
    pub witness: Hermitian,
    /// Closed form rather than an iterative solve.
    pub exact: bool,
    /// Optimality gap bound of the iterative solve (0 when exact).
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub enum Kind {
    Singleton(Hermitian),
    Hull(Vec<Hermitian>),
    /// {I ⊗ ρ}: identity on the factors flagged true, any state on the rest.
    Conditional { identity: Vec<bool> },
    /// Images of all input states under a channel.
    ChannelImage { kraus: Vec<CMat>, dims_in: Vec<usize> },
    /// Diagonal density operators.
    Incoherent,
    /// PSD operators with ‖ρ^Γ‖₁ ≤ 1, Γ transposing the flagged factors.
    Rains { transposed: Vec<bool> },
    /// PSD operators with Wigner trace norm at most one, n qudits of odd
    /// prime dimension d.
    Mana { d: usize },
}

#[derive(Clone, Debug)]
pub struct StateSet {
    dims: Vec<usize>,
    kind: Kind,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!("invalid factor list {dims:?}")));
    }
    let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
    if n > MAX_DIM {
        return Err(Error::ResourceLimit(format!("set dimension {n} exceeds cap {MAX_DIM}")));
    }
    Ok(n)
}

fn check_psd(h: &Hermitian) -> Result<()> {
    let min = h.min_eigenvalue()?;
    if min < -1e-9 * h.max_abs_entry().max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| d % k != 0)
}

fn column_projector(v: &CMat, col: usize, dims: &[usize]) -> Hermitian {
    let c: Vec<_> = v.column(col).iter().copied().collect();
    Hermitian::pure(&c).with_dims(dims.to_vec()).expect("dims match")
}

impl StateSet {
    pub fn singleton(rho: Hermitian) -> Result<Self> {
        check_dims(rho.dims())?;
        check_psd(&rho)?;
        Ok(Self { dims: rho.dims().to_vec(), kind: Kind::Singleton(rho) })
    }

    /// Convex hull of explicit generators.
    pub fn hull(generators: Vec<Hermitian>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::Config("hull needs at least one generator".into()))?;
        check_dims(first.dims())?;
        for g in &generators {
            first.check_same_shape(g)?;
            check_psd(g)?;
        }
        Ok(Self { dims: first.dims().to_vec(), kind: Kind::Hull(generators) })
    }

    /// {I_A ⊗ ρ_B : ρ_B a state}.
    pub fn conditional(a_dim: usize, b_dim: usize) -> Result<Self> {
        Self::conditional_with_mask(vec![a_dim, b_dim], vec![true, false])
    }

    pub fn conditional_with_mask(dims: Vec<usize>, identity: Vec<bool>) -> Result<Self> {
        check_dims(&dims)?;
        if identity.len() != dims.len() || identity.iter().all(|&i| i) {
            return Err(Error::Dimension("conditional mask must match the factors and leave a state factor".into()));
        }
        Ok(Self { dims, kind: Kind::Conditional { identity } })
    }

    /// Image of the state space under the channel with the given Kraus
    /// operators (each `d_out × d_in`, trace preserving).
    pub fn channel_image(kraus: Vec<CMat>, dims_in: Vec<usize>, dims_out: Vec<usize>) -> Result<Self> {
        let d_in = check_dims(&dims_in)?;
        let d_out = check_dims(&dims_out)?;
        if kraus.is_empty() || kraus.len() > MAX_KRAUS {
            return Err(Error::Config(format!("channel needs between 1 and {MAX_KRAUS} Kraus operators")));
        }
        let mut acc = CMat::zeros(d_in, d_in);
        for k in &kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::Dimension(format!("Kraus operator is {}x{}, expected {d_out}x{d_in}", k.nrows(), k.ncols())));
            }
            acc += k.adjoint() * k;
        }
        let dev = (acc - CMat::identity(d_in, d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-8 {
            return Err(Error::Config(format!("Kraus operators are not trace preserving (deviation {dev:e})")));
        }
        Ok(Self { dims: dims_out, kind: Kind::ChannelImage { kraus, dims_in } })
    }

    pub fn incoherent(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        Ok(Self { dims, kind: Kind::Incoherent })
    }

    /// Rains set on A⊗B with the transpose on B.
    pub fn rains(a_dim: usize, b_dim: usize) -> Result<Self> {
        Self::rains_with_mask(vec![a_dim, b_dim], vec![false, true])
    }

    pub fn rains_with_mask(dims: Vec<usize>, transposed: Vec<bool>) -> Result<Self> {
        check_dims(&dims)?;
        if transposed.len() != dims.len() {
            return Err(Error::Dimension("transpose mask must match the factors".into()));
        }
        Ok(Self { dims, kind: Kind::Rains { transposed } })
    }

    pub fn mana(d: usize, n: usize) -> Result<Self> {
        if d % 2 == 0 || !is_prime(d) {
            return Err(Error::param("d", d as f64, "mana sets need an odd prime local dimension"));
        }
        if n == 0 {
            return Err(Error::param("n", 0.0, "at least one qudit"));
        }
        let dims = vec![d; n];
        check_dims(&dims)?;
        Ok(Self { dims, kind: Kind::Mana { d } })
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Singleton(_) => "singleton",
            Kind::Hull(_) => "hull",
            Kind::Conditional { .. } => "conditional",
            Kind::ChannelImage { .. } => "channel_image",
            Kind::Incoherent => "incoherent",
            Kind::Rains { .. } => "rains",
            Kind::Mana { .. } => "mana",
        }
    }

    /// Finite list of points whose hull is the set, when one is known.
    pub fn generators(&self) -> Option<Vec<Hermitian>> {
        match &self.kind {
            Kind::Singleton(r) => Some(vec![r.clone()]),
            Kind::Hull(g) => Some(g.clone()),
            Kind::Incoherent => {
                let n = self.dim();
                Some(
                    (0..n)
                        .map(|i| {
                            let mut v = vec![0.0; n];
                            v[i] = 1.0;
                            Hermitian::diag_with_dims(&v, self.dims.clone()).expect("dims")
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    pub fn is_enumerable(&self) -> bool {
        matches!(self.kind, Kind::Singleton(_) | Kind::Hull(_) | Kind::Incoherent)
    }

    /// A member of the set, in its relative interior for every kind except
    /// the Rains and mana sets (where it is the maximally mixed state).
    pub fn interior_point(&self) -> Hermitian {
        match &self.kind {
            Kind::Singleton(r) => r.clone(),
            Kind::Hull(g) => {
                let mut acc = Hermitian::zeros(&self.dims);
                for x in g {
                    acc = acc.add(x);
                }
                acc.scale(1.0 / g.len() as f64)
            }
            Kind::Conditional { identity } => {
                let b: usize = self.dims.iter().zip(identity).filter(|(_, &i)| !i).map(|(d, _)| d).product();
                Hermitian::identity(&self.dims).scale(1.0 / b as f64)
            }
            Kind::ChannelImage { kraus, dims_in } => apply(kraus, &Hermitian::maximally_mixed(dims_in), &self.dims),
            Kind::Incoherent | Kind::Rains { .. } | Kind::Mana { .. } => Hermitian::maximally_mixed(&self.dims),
        }
    }

    fn check_arg(&self, x: &Hermitian) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension(format!("operator of dimension {} against a set of dimension {}", x.dim(), self.dim())));
        }
        Ok(())
    }

    /// Support function h(X) = sup over members of tr[Xρ].
    pub fn max_linear(&self, x: &Hermitian) -> Result<SupportValue> {
        self.check_arg(x)?;
        let x = x.clone().with_dims(self.dims.clone())?;
        let exact = |witness: Hermitian| SupportValue { value: x.inner(&witness), witness, exact: true, gap: 0.0 };
        Ok(match &self.kind {
            Kind::Singleton(r) => exact(r.clone()),
            Kind::Hull(g) => {
                let k = (0..g.len()).max_by(|&a, &b| x.inner(&g[a]).total_cmp(&x.inner(&g[b]))).expect("non-empty");
                exact(g[k].clone())
            }
            Kind::Conditional { identity } => {
                let keep: Vec<usize> = (0..self.dims.len()).filter(|&k| !identity[k]).collect();
                let y = x.partial_trace(&keep)?;
                let sp = y.eig()?;
                let top = column_projector(&sp.vectors, sp.values.len() - 1, y.dims());
                exact(embed_conditional(&self.dims, identity, &top)?)
            }
            Kind::ChannelImage { kraus, dims_in } => {
                let y = adjoint(kraus, &x, dims_in);
                let sp = y.eig()?;
                let top = column_projector(&sp.vectors, sp.values.len() - 1, dims_in);
                exact(apply(kraus, &top, &self.dims))
            }
            Kind::Incoherent => {
                let d = x.diagonal();
                let k = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("non-empty");
                let mut v = vec![0.0; d.len()];
                v[k] = 1.0;
                exact(Hermitian::diag_with_dims(&v, self.dims.clone())?)
            }
            Kind::Rains { transposed } => rains::support(&self.dims, transposed, &x)?,
            Kind::Mana { d } => mana::support(*d, &self.dims, &x)?,
        })
    }

    /// Reverse support function inf over members of tr[Xρ].
    pub fn min_linear(&self, x: &Hermitian) -> Result<SupportValue> {
        let s = self.max_linear(&x.scale(-1.0))?;
        Ok(SupportValue { value: -s.value, ..s })
    }

    /// Membership at absolute tolerance `tol` (Frobenius distance for the
    /// closed-form kinds, constraint slack for the norm-ball kinds).
    pub fn contains(&self, rho: &Hermitian, tol: f64) -> Result<bool> {
        self.check_arg(rho)?;
        let rho = rho.clone().with_dims(self.dims.clone())?;
        if rho.min_eigenvalue()? < -tol {
            return Ok(false);
        }
        match &self.kind {
            Kind::Singleton(r) => Ok(rho.sub(r).norm_fro() <= tol),
            Kind::Hull(g) => {
                let pts: Vec<Vec<f64>> = g.iter().map(|x| herm_to_vec(&x.sub(&rho))).collect();
                Ok(minnorm::min_norm_point(&pts).norm <= tol)
            }
            Kind::Conditional { identity } => {
                let keep: Vec<usize> = (0..self.dims.len()).filter(|&k| !identity[k]).collect();
                let a: usize = self.dims.iter().zip(identity).filter(|(_, &i)| i).map(|(d, _)| d).product();
                let tau = rho.partial_trace(&keep)?.scale(1.0 / a as f64);
                let back = embed_conditional(&self.dims, identity, &tau)?;
                Ok(rho.sub(&back).norm_fro() <= tol && (tau.trace() - 1.0).abs() <= tol)
            }
            Kind::ChannelImage { kraus, dims_in } => channel_contains(kraus, dims_in, &rho, tol),
            Kind::Incoherent => {
                let n = rho.dim();
                let m = rho.matrix();
                let off = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].norm()).fold(0.0, f64::max);
                Ok(off <= tol && (rho.trace() - 1.0).abs() <= tol)
            }
            Kind::Rains { transposed } => {
                let subs: Vec<usize> = (0..self.dims.len()).filter(|&k| transposed[k]).collect();
                Ok(rho.partial_transpose(&subs)?.trace_norm()? <= 1.0 + tol)
            }
            Kind::Mana { d } => Ok(wigner_norm(&rho, *d)? <= 1.0 + tol),
        }
    }

    /// W ∈ C°: h(W) ≤ 1 + tol.
    pub fn polar_contains(&self, w: &Hermitian, tol: f64) -> Result<bool> {
        Ok(self.max_linear(w)?.value <= 1.0 + tol)
    }

    /// The set of the composite system, following each kind's n-copy rule.
    pub fn tensor(&self, other: &StateSet) -> Result<StateSet> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        let cat = |a: &[bool], b: &[bool]| -> Vec<bool> { a.iter().chain(b).copied().collect() };
        match (&self.kind, &other.kind) {
            (Kind::Singleton(a), Kind::Singleton(b)) => StateSet::singleton(a.kron(b)?),
            (Kind::Hull(g), Kind::Singleton(b)) => StateSet::hull(g.iter().map(|a| a.kron(b)).collect::<Result<_>>()?),
            (Kind::Singleton(a), Kind::Hull(g)) => StateSet::hull(g.iter().map(|b| a.kron(b)).collect::<Result<_>>()?),
            (Kind::Conditional { identity: a }, Kind::Conditional { identity: b }) => StateSet::conditional_with_mask(dims, cat(a, b)),
            (Kind::ChannelImage { kraus: ka, dims_in: ia }, Kind::ChannelImage { kraus: kb, dims_in: ib }) => {
                if ka.len() * kb.len() > MAX_KRAUS {
                    return Err(Error::ResourceLimit(format!("more than {MAX_KRAUS} Kraus operators")));
                }
                let kraus = ka.iter().flat_map(|a| kb.iter().map(move |b| a.kronecker(b))).collect();
                let mut dims_in = ia.clone();
                dims_in.extend_from_slice(ib);
                StateSet::channel_image(kraus, dims_in, dims)
            }
            (Kind::Incoherent, Kind::Incoherent) => StateSet::incoherent(dims),
            (Kind::Rains { transposed: a }, Kind::Rains { transposed: b }) => StateSet::rains_with_mask(dims, cat(a, b)),
            (Kind::Mana { d: a }, Kind::Mana { d: b }) if a == b => StateSet::mana(*a, dims.len()),
            _ => Err(Error::Unsupported(format!("tensor product of {} and {} sets", self.kind_name(), other.kind_name()))),
        }
    }

    pub fn tensor_power(&self, n: usize) -> Result<StateSet> {
        if n == 0 {
            return Err(Error::param("n", 0.0, "at least one copy"));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }
}

impl LinearOracle for StateSet {
    fn argmin(&self, g: &Hermitian) -> Result<Hermitian> {
        Ok(self.min_linear(g)?.witness)
    }

    fn is_point(&self) -> bool {
        match &self.kind {
            Kind::Singleton(_) => true,
            Kind::Hull(g) => g.len() == 1,
            _ => false,
        }
    }
}

/// I on the identity factors, `tau` on the others, in the set's factor order.
pub(crate) fn embed_conditional(dims: &[usize], identity: &[bool], tau: &Hermitian) -> Result<Hermitian> {
    let a_idx: Vec<usize> = (0..dims.len()).filter(|&k| identity[k]).collect();
    let b_idx: Vec<usize> = (0..dims.len()).filter(|&k| !identity[k]).collect();
    let b_dims: Vec<usize> = b_idx.iter().map(|&k| dims[k]).collect();
    let tau = tau.clone().with_dims(b_dims)?;
    if a_idx.is_empty() {
        return Ok(tau);
    }
    let a_dims: Vec<usize> = a_idx.iter().map(|&k| dims[k]).collect();
    let joined = Hermitian::identity(&a_dims).kron(&tau)?;
    // source position of every original factor
    let perm: Vec<usize> = (0..dims.len())
        .map(|k| match identity[k] {
            true => a_idx.iter().position(|&a| a == k).unwrap(),
            false => a_idx.len() + b_idx.iter().position(|&b| b == k).unwrap(),
        })
        .collect();
    joined.permute_subsystems(&perm)
}

pub(crate) fn apply(kraus: &[CMat], x: &Hermitian, dims_out: &[usize]) -> Hermitian {
    let d = kraus[0].nrows();
    let mut acc = CMat::zeros(d, d);
    for k in kraus {
        acc += k * x.matrix() * k.adjoint();
    }
    Hermitian::from_parts(acc, dims_out.to_vec())
}

pub(crate) fn adjoint(kraus: &[CMat], y: &Hermitian, dims_in: &[usize]) -> Hermitian {
    let d = kraus[0].ncols();
    let mut acc = CMat::zeros(d, d);
    for k in kraus {
        acc += k.adjoint() * y.matrix() * k;
    }
    Hermitian::from_parts(acc, dims_in.to_vec())
}

/// ρ = N(τ) for some state τ: least squares for the affine solution space,
/// then a barrier solve for the largest attainable λ_min(τ).
fn channel_contains(kraus: &[CMat], dims_in: &[usize], rho: &Hermitian, tol: f64) -> Result<bool> {
    let d_in: usize = dims_in.iter().product();
    let nin = d_in * d_in;
    let basis: Vec<Hermitian> = (0..nin)
        .map(|k| {
            let mut e = vec![0.0; nin];
            e[k] = 1.0;
            crate::optim::herm_from_vec(&e, dims_in)
        })
        .collect();
    let cols: Vec<Vec<f64>> = basis.iter().map(|b| herm_to_vec(&apply(kraus, b, rho.dims()))).collect();
    let nout = cols[0].len();
    let m = DMatrix::<f64>::from_fn(nout, nin, |r, c| cols[c][r]);
    let r = nalgebra::DVector::from_vec(herm_to_vec(rho));
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = 1e-10 * smax.max(1e-300);
    let t0 = svd.solve(&r, cut).map_err(|e| Error::Singular(e.to_string()))?;
    if (&m * &t0 - &r).norm() > tol {
        return Ok(false);
    }
    let tau0 = crate::optim::herm_from_vec(t0.as_slice(), dims_in);
    let vt = svd.v_t.as_ref().expect("requested");
    let kernel: Vec<Hermitian> = (0..nin)
        .filter(|&i| i >= svd.singular_values.len() || svd.singular_values[i] <= cut)
        .map(|i| crate::optim::herm_from_vec(&vt.row(i).iter().copied().collect::<Vec<_>>(), dims_in))
        .collect();
    let lmin0 = tau0.min_eigenvalue()?;
    if lmin0 >= -tol {
        return Ok(true);
    }
    if kernel.is_empty() {
        return Ok(false);
    }
    // variables: kernel coefficients, then s; maximize s with τ − sI ⪰ 0
    let nv = kernel.len() + 1;
    let mut sdp = barrier::Sdp::new(nv);
    let mut coeffs: Vec<(usize, CMat)> = kernel.iter().enumerate().map(|(i, k)| (i, k.matrix().clone())).collect();
    coeffs.push((nv - 1, -CMat::identity(d_in, d_in)));
    sdp.lmis.push(barrier::Lmi { constant: tau0.matrix().clone(), coeffs });
    // s is bounded by the trace of τ, which the kernel cannot change
    sdp.lin.push(barrier::LinIneq { constant: 1.0, coeffs: vec![(nv - 1, -1.0)] });
    sdp.objective[nv - 1] = -1.0;
    let mut x0 = vec![0.0; nv];
    x0[nv - 1] = lmin0 - 1.0;
    let sol = sdp.solve(x0, barrier::SdpOptions { gap_tol: 1e-11, ..Default::default() })?;
    Ok(-sol.value >= -tol)
}

/// A sequence of sets A₁, A₂, … indexed by the number of copies.
#[derive(Clone, Debug)]
pub enum SetFamily {
    /// A_n is the n-fold tensor composition of one set.
    Iid(StateSet),
    /// A_n listed explicitly for n = 1..=len.
    Explicit(Vec<StateSet>),
}

impl SetFamily {
    pub fn at(&self, n: usize) -> Result<StateSet> {
        if n == 0 {
            return Err(Error::param("n", 0.0, "families are indexed from one copy"));
        }
        match self {
            SetFamily::Iid(s) => s.tensor_power(n),
            SetFamily::Explicit(v) => v
                .get(n - 1)
                .cloned()
                .ok_or_else(|| Error::Unsupported(format!("family lists {} members, requested copy count {n}", v.len()))),
        }
    }

    pub fn base(&self) -> &StateSet {
        match self {
            SetFamily::Iid(s) => s,
            SetFamily::Explicit(v) => &v[0],
        }
    }

    /// Factor dimensions of a single copy.
    pub fn local_dims(&self) -> &[usize] {
        self.base().dims()
    }

    pub fn local_dim(&self) -> usize {
        self.base().dim()
    }

    /// Largest copy count available, if bounded.
    pub fn max_copies(&self) -> Option<usize> {
        match self {
            SetFamily::Iid(_) => None,
            SetFamily::Explicit(v) => Some(v.len()),
        }
    }

    /// Copies available without exceeding the dimension cap.
    pub fn copies_within_cap(&self, cap: usize) -> usize {
        let d = self.local_dim().max(2);
        let mut n = 0;
        let mut dim = 1usize;
        while dim.saturating_mul(d) <= cap {
            dim *= d;
            n += 1;
        }
        match self.max_copies() {
            Some(m) => n.min(m),
            None => n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::C64;

    fn bell() -> Hermitian {
        let s = 0.5f64.sqrt();
        Hermitian::pure_real(&[s, 0.0, 0.0, s]).with_dims(vec![2, 2]).unwrap()
    }

    #[test]
    fn closed_forms() {
        let c = StateSet::conditional(2, 3).unwrap();
        assert!((c.max_linear(&Hermitian::identity(&[2, 3])).unwrap().value - 2.0).abs() < 1e-12);
        let inc = StateSet::incoherent(vec![2]).unwrap();
        assert!((inc.max_linear(&Hermitian::diag(&[0.2, 0.8])).unwrap().value - 0.8).abs() < 1e-15);
        let h = StateSet::hull(vec![Hermitian::diag(&[1.0, 0.0]), Hermitian::diag(&[0.0, 1.0])]).unwrap();
        assert!((h.min_linear(&Hermitian::diag(&[3.0, 5.0])).unwrap().value - 3.0).abs() < 1e-15);
        assert!(!inc.polar_contains(&Hermitian::diag(&[2.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn rains_on_maximally_entangled() {
        let r = StateSet::rains(2, 2).unwrap();
        let s = r.max_linear(&bell()).unwrap();
        assert!((s.value - 0.5).abs() < 1e-7, "{}", s.value);
        assert!(r.contains(&s.witness, 1e-6).unwrap());
        let z = r.min_linear(&bell()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn mana_witness_in_set() {
        let m = StateSet::mana(3, 1).unwrap();
        let x = Hermitian::diag(&[1.0, 0.3, -0.2]);
        let s = m.max_linear(&x).unwrap();
        assert!(wigner_norm(&s.witness, 3).unwrap() <= 1.0 + 1e-6);
        assert!((s.value - x.inner(&s.witness)).abs() < 1e-12);
        // |0⟩ has a negative-free Wigner function only after mixing
        assert!(s.value <= 1.0 + 1e-9);
    }

    #[test]
    fn conditional_tensor_interleaves() {
        let c = StateSet::conditional(2, 2).unwrap();
        let c2 = c.tensor(&c).unwrap();
        let w = c2.interior_point();
        assert!(c2.contains(&w, 1e-9).unwrap());
        assert!((w.trace() - 4.0).abs() < 1e-12);
        let x = Hermitian::diag(&[1.0, 2.0, 0.5, 0.1]).with_dims(vec![2, 2]).unwrap();
        let h1 = c.max_linear(&x).unwrap().value;
        let h2 = c2.max_linear(&x.kron(&x).unwrap()).unwrap().value;
        assert!((h2 - h1 * h1).abs() < 1e-10);
    }

    #[test]
    fn hull_membership() {
        let plus = Hermitian::pure_real(&[1.0, 1.0]);
        let zero = Hermitian::diag(&[1.0, 0.0]);
        let h = StateSet::hull(vec![zero.clone(), plus.clone()]).unwrap();
        assert!(h.contains(&zero.scale(0.3).add(&plus.scale(0.7)), 1e-10).unwrap());
        assert!(!h.contains(&Hermitian::diag(&[0.0, 1.0]), 1e-6).unwrap());
        assert!(StateSet::hull(vec![zero.clone()]).unwrap().tensor(&StateSet::hull(vec![plus]).unwrap()).is_err());
    }

    #[test]
    fn channel_image_of_dephasing() {
        let k0 = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let k1 = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let s = StateSet::channel_image(vec![k0, k1], vec![2], vec![2]).unwrap();
        assert!(s.contains(&Hermitian::diag(&[0.3, 0.7]), 1e-8).unwrap());
        assert!(!s.contains(&Hermitian::pure_real(&[1.0, 1.0]), 1e-6).unwrap());
        let v = s.max_linear(&Hermitian::pure_real(&[1.0, 1.0])).unwrap();
        assert!((v.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn explicit_family_without_closure() {
        let fam = SetFamily::Explicit(vec![StateSet::incoherent(vec![2]).unwrap(), StateSet::singleton(bell()).unwrap()]);
        assert_eq!(fam.at(2).unwrap().kind_name(), "singleton");
        assert!(fam.at(3).is_err());
    }
}
