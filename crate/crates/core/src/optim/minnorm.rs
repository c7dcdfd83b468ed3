//! Wolfe's minimum-norm-point algorithm for the convex hull of finitely many
//! points in Rⁿ.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct MinNorm {
    /// Convex weights over the input points.
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
    pub norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(points: &[Vec<f64>], idx: &[usize], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; points[0].len()];
    for (&i, &c) in idx.iter().zip(w) {
        for (o, p) in out.iter_mut().zip(&points[i]) {
            *o += c * p;
        }
    }
    out
}

/// Affine minimizer of ‖Σ μᵢ pᵢ‖ subject to Σ μᵢ = 1.
fn affine_min(points: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
    for r in 0..k {
        for c in 0..k {
            a[(r, c)] = dot(&points[idx[r]], &points[idx[c]]);
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k + 1);
    b[k] = 1.0;
    let svd = a.svd(true, true);
    let tol = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&b, tol).unwrap_or_else(|_| DVector::from_element(k + 1, 1.0 / k as f64));
    let mu: Vec<f64> = (0..k).map(|i| sol[i]).collect();
    let s: f64 = mu.iter().sum();
    mu.into_iter().map(|m| m / s).collect()
}

/// Closest point to the origin in conv{points}.
pub fn min_norm_point(points: &[Vec<f64>]) -> MinNorm {
    assert!(!points.is_empty());
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let start = (0..points.len()).min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b]))).unwrap();
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let mut x = points[start].clone();
    for _ in 0..(50 * points.len() + 100) {
        let j = (0..points.len()).min_by(|&a, &b| dot(&x, &points[a]).total_cmp(&dot(&x, &points[b]))).unwrap();
        if dot(&x, &x) - dot(&x, &points[j]) <= 1e-14 * scale || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let mu = affine_min(points, &set);
            if mu.iter().all(|&m| m > 1e-15) {
                lam = mu;
                x = combine(points, &set, &lam);
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lam.iter().zip(&mu) {
                if *m <= 1e-15 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut k = 0;
            while k < set.len() {
                if lam[k] <= 1e-15 && set.len() > 1 {
                    set.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
            x = combine(points, &set, &lam);
            if set.len() == 1 {
                break;
            }
        }
    }
    let mut weights = vec![0.0; points.len()];
    for (&i, &l) in set.iter().zip(&lam) {
        weights[i] = l;
    }
    let norm = dot(&x, &x).sqrt();
    MinNorm { weights, point: x, norm }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_and_triangle() {
        let r = min_norm_point(&[vec![1.0, 1.0], vec![1.0, -1.0]]);
        assert!((r.norm - 1.0).abs() < 1e-12);
        let r = min_norm_point(&[vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]);
        assert!(r.norm < 1e-12, "{r:?}");
        let s: f64 = r.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
