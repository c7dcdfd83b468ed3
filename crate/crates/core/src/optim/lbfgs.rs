//! Limited-memory BFGS with Armijo backtracking, for smooth unconstrained
//! minimization over real vectors.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the objective falls below this value (unbounded detection).
    pub lower_cap: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-9, max_iter: 2000, memory: 12, lower_cap: f64::NEG_INFINITY }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective went below `lower_cap`.
    pub unbounded: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `f`, which returns the value and gradient. Non-finite values
/// are treated as infeasible and shrink the step.
pub fn minimize(x0: Vec<f64>, mut f: impl FnMut(&[f64]) -> (f64, Vec<f64>), opts: LbfgsOptions) -> LbfgsResult {
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut stall = 0;
    loop {
        let gn = norm(&g);
        if gn <= opts.grad_tol || !fx.is_finite() {
            return LbfgsResult { x, value: fx, grad_norm: gn, iterations, converged: fx.is_finite(), unbounded: false };
        }
        if fx < opts.lower_cap {
            return LbfgsResult { x, value: fx, grad_norm: gn, iterations, converged: false, unbounded: true };
        }
        if iterations >= opts.max_iter || stall >= 4 {
            return LbfgsResult { x, value: fx, grad_norm: gn, iterations, converged: false, unbounded: false };
        }
        iterations += 1;

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        } else {
            let scale = 1.0 / gn.max(1.0);
            for qi in q.iter_mut() {
                *qi *= scale;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v / gn.max(1.0)).collect();
            slope = dot(&g, &d);
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let (fn_, gn_) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fn_, gn_));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_, gnew)) = accepted else {
            if hist.is_empty() {
                let gn = norm(&g);
                return LbfgsResult { x, value: fx, grad_norm: gn, iterations, converged: false, unbounded: false };
            }
            hist.clear();
            stall += 1;
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > opts.memory {
                hist.pop_front();
            }
        }
        if fx - fn_ <= 1e-15 * fx.abs().max(1e-300) {
            stall += 1;
        } else {
            stall = 0;
        }
        x = xn;
        fx = fn_;
        g = gnew;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize(
            vec![-1.2, 1.0],
            |x| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
                (f, g)
            },
            LbfgsOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }
}
