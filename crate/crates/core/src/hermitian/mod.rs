//! Dense Hermitian operators with subsystem bookkeeping.
//!
//! Every operator carries the list of its tensor factor dimensions. Subsystem
//! ordering is positional, left to right, as produced by [`Hermitian::kron`].

mod json;
mod ops;

pub use json::{operator_from_json, operator_from_value, operator_to_json, Encoding};
pub use ops::{fidelity_and_distances, spec_count, Distances, MAX_DIM};

use crate::tolerances::Tol;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;




#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    dims: Vec<usize>,
    mat: CMat,
}

/// Eigen-decomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMat,
    dims: Vec<usize>,
}

/// Scalar functions applied through the spectral calculus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFn {
    Log2,
    Ln,
    Power(f64),
    PositivePart,
    Exp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    Normalized,
    Subnormalized,
}

/// A validated positive semidefinite operator with trace at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: Hermitian,
    mode: TraceMode,
}

fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

impl Hermitian {
    /// Builds an operator from a square matrix, rejecting inputs that are not
    /// Hermitian within `1e-8` relative to the largest entry.
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_dims(&dims, mat.nrows())?;
        let scale = mat.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > Tol::Hermitian.get() * scale {
            return Err(Error::Dimension(format!("matrix is not Hermitian (asymmetry {asym:e})")));
        }
        Ok(Self { dims, mat: symmetrize(&mat) })
    }

    pub fn from_matrix(mat: CMat) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, vec![n])
    }

    /// Symmetrizes without the Hermiticity check; for internal results that
    /// are Hermitian up to rounding.
    pub(crate) fn from_parts(mat: CMat, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        Self { dims, mat: symmetrize(&mat) }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { dims: dims.to_vec(), mat: CMat::zeros(n, n) }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self { dims: dims.to_vec(), mat: CMat::identity(n, n) }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self::identity(dims).scale(1.0 / n as f64)
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::diag_with_dims(values, vec![values.len()]).expect("single factor")
    }

    pub fn diag_with_dims(values: &[f64], dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, values.len())?;
        let n = values.len();
        let mut mat = CMat::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            mat[(i, i)] = C64::new(*v, 0.0);
        }
        Ok(Self { dims, mat })
    }

    /// Rank-one projector |v⟩⟨v| of a (not necessarily normalized) vector.
    pub fn pure(v: &[C64]) -> Self {
        let col = nalgebra::DVector::from_column_slice(v);
        let n = v.len();
        Self { dims: vec![n], mat: &col * col.adjoint() }
    }

    /// Normalized pure state from real amplitudes.
    pub fn pure_real(v: &[f64]) -> Self {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let c: Vec<C64> = v.iter().map(|x| C64::new(x / norm, 0.0)).collect();
        Self::pure(&c)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Same entries, new factorization of the dimension.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        self.dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// tr[self · other], real for Hermitian arguments.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        // tr[AB] = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, t: f64) -> Hermitian {
        Hermitian { dims: self.dims.clone(), mat: &self.mat * C64::new(t, 0.0) }
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian { dims: self.dims.clone(), mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian { dims: self.dims.clone(), mat: &self.mat - &other.mat }
    }

    /// self + t·other
    pub fn axpy(&self, t: f64, other: &Hermitian) -> Hermitian {
        Hermitian { dims: self.dims.clone(), mat: &self.mat + &other.mat * C64::new(t, 0.0) }
    }

    /// U · self · U†
    pub fn conjugate(&self, u: &CMat) -> Hermitian {
        let n = u.nrows();
        let dims = if n == self.dim() { self.dims.clone() } else { vec![n] };
        Hermitian::from_parts(u * &self.mat * u.adjoint(), dims)
    }

    /// A · self · A for Hermitian A.
    pub fn sandwich(&self, a: &Hermitian) -> Hermitian {
        Hermitian::from_parts(&a.mat * &self.mat * &a.mat, self.dims.clone())
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.mat[(i, j)].norm() <= tol))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn eig(&self) -> Result<Spectral> {
        let n = self.dim();
        let eig = self
            .mat
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 100 * n.max(10))
            .ok_or(Error::NonConvergence { what: "eigensolver", iterations: 100 * n.max(10), residual: f64::NAN })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Spectral { values, vectors, dims: self.dims.clone() })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().unwrap_or(&0.0))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.first().unwrap_or(&0.0))
    }

    /// Applies `f` to the spectrum. Eigenvalues are first floored at `clip`
    /// (for `Log2`, `Ln` and negative powers an eigenvalue at or below `clip`
    /// is a singular-operator error; use [`Hermitian::matrix_fn_on_support`]
    /// to restrict to the support instead).
    pub fn matrix_fn(&self, f: MatrixFn, clip: f64) -> Result<Hermitian> {
        self.eig()?.matrix_fn(f, clip, false)
    }

    /// Like [`Hermitian::matrix_fn`], but singular functions act as zero on the
    /// eigenspaces at or below the support floor.
    pub fn matrix_fn_on_support(&self, f: MatrixFn) -> Result<Hermitian> {
        self.eig()?.matrix_fn(f, 0.0, true)
    }

    pub fn positive_part(&self) -> Result<Hermitian> {
        self.matrix_fn(MatrixFn::PositivePart, 0.0)
    }

    pub fn sqrt_psd(&self) -> Result<Hermitian> {
        self.matrix_fn(MatrixFn::Power(0.5), 0.0)
    }

    /// Σ|λ_i|
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|v| v.abs()).sum())
    }

    /// Projector onto the numerical support.
    pub fn support_projector(&self) -> Result<Hermitian> {
        Ok(self.eig()?.support_projector())
    }

    /// Validates positive semidefiniteness, clipping negative eigenvalues
    /// above `-1e-10 · max(1, ‖H‖)`.
    pub fn clip_psd(&self) -> Result<Hermitian> {
        let sp = self.eig()?;
        let scale = sp.max_abs().max(1.0);
        let min = sp.values.first().copied().unwrap_or(0.0);
        if min < -Tol::PsdFloor.get() * scale {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if min >= 0.0 {
            return Ok(self.clone());
        }
        Ok(sp.map(|v| v.max(0.0)))
    }

    pub fn check_same_shape(&self, other: &Hermitian) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != n {
        return Err(Error::Dimension(format!("factor dimensions {dims:?} do not multiply to {n}")));
    }
    Ok(())
}

impl Spectral {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Absolute threshold for membership in the support.
    pub fn floor(&self) -> f64 {
        Tol::SupportFloor.get() * self.max_abs()
    }

    pub fn in_support(&self, i: usize) -> bool {
        self.values[i] > self.floor()
    }

    /// U diag(f(λ)) U†
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let s = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        Hermitian::from_parts(scaled * self.vectors.adjoint(), self.dims.clone())
    }

    /// Spectral decomposition of `t` times the operator.
    pub fn scaled(&self, t: f64) -> Spectral {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= t;
        }
        if t < 0.0 {
            out.values.reverse();
            let n = out.dim();
            out.vectors = CMat::from_fn(n, n, |r, c| self.vectors[(r, n - 1 - c)]);
        }
        out
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map(|v| v)
    }

    pub fn support_projector(&self) -> Hermitian {
        let fl = self.floor();
        self.map(|v| if v > fl { 1.0 } else { 0.0 })
    }

    pub fn support_rank(&self) -> usize {
        let fl = self.floor();
        self.values.iter().filter(|&&v| v > fl).count()
    }

    pub fn matrix_fn(&self, f: MatrixFn, clip: f64, on_support: bool) -> Result<Hermitian> {
        let fl = self.floor().max(clip);
        let singular = matches!(f, MatrixFn::Log2 | MatrixFn::Ln) || matches!(f, MatrixFn::Power(p) if p <= 0.0);
        if singular && !on_support {
            if let Some(v) = self.values.iter().find(|&&v| v <= fl) {
                return Err(Error::Singular(format!("eigenvalue {v:e} at or below floor {fl:e}")));
            }
        }
        let g = move |v: f64| -> f64 {
            let c = v.max(clip);
            match f {
                MatrixFn::PositivePart => v.max(0.0),
                MatrixFn::Exp => v.exp(),
                _ if singular && v <= fl => 0.0,
                MatrixFn::Log2 => c.log2(),
                MatrixFn::Ln => c.ln(),
                MatrixFn::Power(p) => {
                    if c <= 0.0 {
                        0.0
                    } else {
                        c.powf(p)
                    }
                }
            }
        };
        Ok(self.map(g))
    }

    /// Coefficients of `e` in the eigenbasis: U† E U.
    pub fn to_eigenbasis(&self, e: &Hermitian) -> CMat {
        self.vectors.adjoint() * e.matrix() * &self.vectors
    }

    pub fn from_eigenbasis(&self, m: &CMat) -> Hermitian {
        Hermitian::from_parts(&self.vectors * m * self.vectors.adjoint(), self.dims.clone())
    }

    /// Fréchet derivative of the spectral function `f` at this operator in
    /// direction `e` (Daleckii–Krein formula). The map is self-adjoint with
    /// respect to the trace inner product.
    pub fn frechet(&self, f: Scalar, e: &Hermitian) -> Hermitian {
        let n = self.dim();
        let mut m = self.to_eigenbasis(e);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= f.divided_difference(self.values[i], self.values[j]);
            }
        }
        self.from_eigenbasis(&m)
    }
}

/// Scalar functions with numerically stable first divided differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Exp,
    Ln,
    Pow(f64),
}

impl Scalar {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Scalar::Exp => x.exp(),
            Scalar::Ln => x.ln(),
            Scalar::Pow(p) => x.powf(p),
        }
    }

    /// (f(a) − f(b)) / (a − b), or f′(a) when a = b.
    pub fn divided_difference(self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d = hi - lo;
        match self {
            Scalar::Exp => {
                if d == 0.0 {
                    lo.exp()
                } else {
                    lo.exp() * d.exp_m1() / d
                }
            }
            Scalar::Ln => {
                if d == 0.0 {
                    1.0 / lo
                } else if d < 0.5 * lo {
                    (d / lo).ln_1p() / d
                } else {
                    (hi.ln() - lo.ln()) / d
                }
            }
            Scalar::Pow(p) => {
                if d == 0.0 {
                    p * lo.powf(p - 1.0)
                } else if d < 0.5 * lo {
                    let r = d / lo;
                    lo.powf(p - 1.0) * (p * r.ln_1p()).exp_m1() / r
                } else {
                    (hi.powf(p) - lo.powf(p)) / d
                }
            }
        }
    }
}

impl DensityOperator {
    /// Validates a state: PSD after clipping and trace in range for `mode`.
    pub fn new(op: Hermitian, mode: TraceMode) -> Result<Self> {
        let op = op.clip_psd()?;
        let t = op.trace();
        let ok = match mode {
            TraceMode::Normalized => (t - 1.0).abs() <= 1e-10,
            TraceMode::Subnormalized => t > 0.0 && t <= 1.0 + 1e-10,
        };
        if !ok {
            let m = match mode {
                TraceMode::Normalized => "normalized",
                TraceMode::Subnormalized => "subnormalized",
            };
            return Err(Error::Trace { trace: t, mode: m });
        }
        Ok(Self { op, mode })
    }

    pub fn normalized(op: Hermitian) -> Result<Self> {
        Self::new(op, TraceMode::Normalized)
    }

    pub fn mode(&self) -> TraceMode {
        self.mode
    }

    pub fn operator(&self) -> &Hermitian {
        &self.op
    }

    pub fn into_operator(self) -> Hermitian {
        self.op
    }
}

impl std::ops::Deref for DensityOperator {
    type Target = Hermitian;
    fn deref(&self) -> &Hermitian {
        &self.op
    }
}
