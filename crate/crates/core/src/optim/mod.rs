//! Numerical building blocks shared by the solvers.

pub mod barrier;
pub mod frank_wolfe;
pub mod lbfgs;
pub mod minnorm;

use crate::hermitian::{CMat, Hermitian, C64};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Isometric real coordinates of a Hermitian matrix: the diagonal, then
/// √2·Re and √2·Im of the strict upper triangle. The Euclidean inner
/// product of two coordinate vectors equals tr[AB].
pub fn herm_to_vec(h: &Hermitian) -> Vec<f64> {
    let n = h.dim();
    let m = h.matrix();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            v.push(SQRT2 * m[(i, j)].re);
            v.push(SQRT2 * m[(i, j)].im);
        }
    }
    v
}

pub fn herm_from_vec(v: &[f64], dims: &[usize]) -> Hermitian {
    let n: usize = dims.iter().product();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(v[k], v[k + 1]) / SQRT2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    Hermitian::from_parts(m, dims.to_vec())
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for the boundary of a monotone predicate: `pred(lo)` false,
/// `pred(hi)` true; returns (lo, hi) bracketing the switch point.
pub fn bisect(mut pred: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn vectorization_is_isometric() {
        let mut r = random::rng(3);
        let a = random::hermitian(4, &mut r);
        let b = random::hermitian(4, &mut r);
        let (va, vb) = (herm_to_vec(&a), herm_to_vec(&b));
        let ip: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((ip - a.inner(&b)).abs() < 1e-12);
        assert!(herm_from_vec(&va, &[4]).sub(&a).norm_fro() < 1e-14);
    }

    #[test]
    fn golden_finds_quadratic_minimum() {
        let (x, _) = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
    }
}
