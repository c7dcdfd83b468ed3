use super::{CMat, Hermitian, Spectral, C64};
use crate::error::{Error, Result};
use serde::Serialize;

/// Default cap on operator dimension.
pub const MAX_DIM: usize = 4096;

/// Largest number of copies for explicit permutation averaging.
const MAX_TWIRL_COPIES: usize = 6;

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

fn check_subsystems(dims: &[usize], idx: &[usize]) -> Result<()> {
    if let Some(&bad) = idx.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("subsystem index {bad} out of range for {} factors", dims.len())));
    }
    Ok(())
}

impl Hermitian {
    /// Tensor product; factor lists are concatenated.
    pub fn kron(&self, other: &Hermitian) -> Result<Hermitian> {
        let n = self.dim() * other.dim();
        if n > MAX_DIM {
            return Err(Error::ResourceLimit(format!("tensor product dimension {n} exceeds cap {MAX_DIM}")));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Hermitian { dims, mat: self.mat.kronecker(&other.mat) })
    }

    /// n-fold tensor power.
    pub fn tensor_power(&self, n: usize) -> Result<Hermitian> {
        if n == 0 {
            return Err(Error::param("n", 0.0, "tensor power needs at least one copy"));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self)?;
        }
        Ok(out)
    }

    /// Traces out every factor not listed in `keep`. Kept factors stay in
    /// their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Hermitian> {
        check_subsystems(&self.dims, keep)?;
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let st = strides(&self.dims);
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
        let offsets = |subs: &[usize]| -> Vec<usize> {
            let sd: Vec<usize> = subs.iter().map(|&k| self.dims[k]).collect();
            let total: usize = sd.iter().product();
            (0..total)
                .map(|i| {
                    let d = digits(i, &sd);
                    subs.iter().zip(d).map(|(&k, v)| v * st[k]).sum()
                })
                .collect()
        };
        let ko = offsets(&keep_sorted);
        let to = offsets(&traced);
        let nk = ko.len();
        let mut out = CMat::zeros(nk, nk);
        for r in 0..nk {
            for c in 0..nk {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &to {
                    acc += self.mat[(ko[r] + t, ko[c] + t)];
                }
                out[(r, c)] = acc;
            }
        }
        let dims = if keep_sorted.is_empty() { vec![1] } else { keep_sorted.iter().map(|&k| self.dims[k]).collect() };
        Ok(Hermitian::from_parts(out, dims))
    }

    /// Transposes the listed factors. Applying it twice is the identity.
    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<Hermitian> {
        check_subsystems(&self.dims, subsystems)?;
        let mut subs = subsystems.to_vec();
        subs.sort_unstable();
        subs.dedup();
        let st = strides(&self.dims);
        let n = self.dim();
        // contribution of the transposed digits of each index
        let part: Vec<usize> = (0..n)
            .map(|i| {
                let d = digits(i, &self.dims);
                subs.iter().map(|&k| d[k] * st[k]).sum()
            })
            .collect();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let ii = i - part[i] + part[j];
                let jj = j - part[j] + part[i];
                out[(ii, jj)] = self.mat[(i, j)];
            }
        }
        Ok(Hermitian { dims: self.dims.clone(), mat: out })
    }

    /// Reorders factors: factor `k` of the result is factor `perm[k]` of
    /// `self`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<Hermitian> {
        let m = self.dims.len();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Dimension(format!("{perm:?} is not a permutation of {m} factors")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let map = permutation_map(&self.dims, perm);
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(map[i], map[j])] = self.mat[(i, j)];
            }
        }
        Ok(Hermitian { dims: new_dims, mat: out })
    }

    /// Projects onto the eigenspaces of `sigma`, eigenvalues grouped by
    /// single linkage at relative tolerance `tol`.
    pub fn pinch(&self, sigma: &Hermitian, tol: f64) -> Result<Hermitian> {
        self.check_same_shape(sigma)?;
        let sp = sigma.eig()?;
        let groups = clusters(&sp.values, tol);
        let mut m = sp.to_eigenbasis(self);
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if groups[i] != groups[j] {
                    m[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        let mut out = sp.from_eigenbasis(&m);
        out.dims = self.dims.clone();
        Ok(out)
    }

    /// Average of π X π† over all permutations π of `n` copies of a
    /// `d`-dimensional system.
    pub fn twirl(&self, n: usize, d: usize) -> Result<Hermitian> {
        if n > MAX_TWIRL_COPIES {
            return Err(Error::ResourceLimit(format!("twirl over {n} copies exceeds cap {MAX_TWIRL_COPIES}")));
        }
        if n == 0 || d.checked_pow(n as u32) != Some(self.dim()) {
            return Err(Error::Dimension(format!("dimension {} is not {d}^{n}", self.dim())));
        }
        let dims = vec![d; n];
        let perms = permutations(n);
        let dim = self.dim();
        let mut acc = CMat::zeros(dim, dim);
        for p in &perms {
            let map = permutation_map(&dims, p);
            for i in 0..dim {
                for j in 0..dim {
                    acc[(map[i], map[j])] += self.mat[(i, j)];
                }
            }
        }
        acc /= C64::new(perms.len() as f64, 0.0);
        Ok(Hermitian::from_parts(acc, dims))
    }
}

/// Index map for a subsystem permutation.
pub(crate) fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_st = strides(&new_dims);
    let n: usize = dims.iter().product();
    (0..n)
        .map(|i| {
            let d = digits(i, dims);
            perm.iter().enumerate().map(|(k, &p)| d[p] * new_st[k]).sum()
        })
        .collect()
}

/// All permutations of 0..n in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Cluster labels for ascending eigenvalues under single linkage.
fn clusters(values: &[f64], tol: f64) -> Vec<usize> {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let gap = tol * scale;
    let mut labels = Vec::with_capacity(values.len());
    let mut label = 0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 && v - values[i - 1] > gap {
            label += 1;
        }
        labels.push(label);
    }
    labels
}

/// Number of distinct eigenvalues under single-linkage clustering at
/// relative tolerance `tol`.
pub fn spec_count(h: &Hermitian, tol: f64) -> Result<usize> {
    let sp = h.eig()?;
    Ok(clusters(&sp.values, tol).last().map_or(0, |l| l + 1))
}

impl Spectral {
    pub fn cluster_count(&self, tol: f64) -> usize {
        clusters(&self.values, tol).last().map_or(0, |l| l + 1)
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Distances {
    /// Generalized fidelity ‖√ρ√σ‖₁ + √((1−trρ)(1−trσ)).
    pub fidelity: f64,
    pub purified: f64,
    /// ½‖ρ−σ‖₁
    pub trace_dist: f64,
}

/// ‖√ρ√σ‖₁ for PSD arguments.
pub fn root_fidelity(rho: &Hermitian, sigma: &Hermitian) -> Result<f64> {
    let sr = rho.sqrt_psd()?;
    let inner = sigma.sandwich(&sr);
    Ok(inner.eigenvalues()?.iter().map(|v| v.max(0.0).sqrt()).sum())
}

pub fn fidelity_and_distances(rho: &Hermitian, sigma: &Hermitian) -> Result<Distances> {
    rho.check_same_shape(sigma)?;
    let rho = rho.clip_psd()?;
    let sigma = sigma.clip_psd()?;
    let extra = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    let fidelity = (root_fidelity(&rho, &sigma)? + extra).clamp(0.0, 1.0);
    let purified = (1.0 - fidelity * fidelity).max(0.0).sqrt();
    let trace_dist = 0.5 * rho.sub(&sigma).trace_norm()?;
    Ok(Distances { fidelity, purified, trace_dist })
}
