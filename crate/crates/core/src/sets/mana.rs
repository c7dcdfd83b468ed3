//! Discrete Wigner representation for odd prime dimensions and h(X) for the
//! set of PSD operators with Wigner trace norm at most one.

use super::SupportValue;
use crate::error::{Error, Result};
use crate::hermitian::{CMat, Hermitian, C64};
use crate::optim::barrier::{hermitian_coords, LinIneq, Lmi, Sdp, SdpOptions};

fn single_qudit(d: usize) -> Vec<CMat> {
    let w = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % d) as f64 / d as f64);
    // parity A₀|j⟩ = |−j⟩
    let a0 = CMat::from_fn(d, d, |r, c| if (r + c) % d == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // Z^a X^b
            let t = CMat::from_fn(d, d, |r, c| if r == (c + b) % d { w(a * r) } else { C64::new(0.0, 0.0) });
            out.push(&t * &a0 * t.adjoint());
        }
    }
    out
}

/// Phase-point operators A_u on n qudits, u running over (Z_d × Z_d)ⁿ in
/// lexicographic order. Each has unit trace and Σ_u A_u = dⁿ I.
pub fn phase_point_operators(d: usize, n: usize) -> Vec<CMat> {
    let one = single_qudit(d);
    let mut ops = one.clone();
    for _ in 1..n {
        ops = ops.iter().flat_map(|a| one.iter().map(move |b| a.kronecker(b))).collect();
    }
    ops
}

fn qudits(rho: &Hermitian, d: usize) -> Result<usize> {
    let mut n = 0;
    let mut dim = 1;
    while dim < rho.dim() {
        dim *= d;
        n += 1;
    }
    if dim != rho.dim() || n == 0 {
        return Err(Error::Dimension(format!("dimension {} is not a power of {d}", rho.dim())));
    }
    Ok(n)
}

/// W(u) = tr[A_u ρ]/dⁿ.
pub fn wigner(rho: &Hermitian, d: usize) -> Result<Vec<f64>> {
    let n = qudits(rho, d)?;
    let scale = 1.0 / rho.dim() as f64;
    Ok(phase_point_operators(d, n)
        .iter()
        .map(|a| (a * rho.matrix()).trace().re * scale)
        .collect())
}

/// Σ_u |W(u)|.
pub fn wigner_norm(rho: &Hermitian, d: usize) -> Result<f64> {
    Ok(wigner(rho, d)?.iter().map(|w| w.abs()).sum())
}

/// max tr[Xρ] over ρ ⪰ 0 with Σ t_u ≤ 1, t_u ≥ |W(u)|.
pub(super) fn support(d: usize, dims: &[usize], x: &Hermitian) -> Result<SupportValue> {
    let ev = x.eigenvalues()?;
    let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if ev[ev.len() - 1] <= 1e-13 * scale {
        return Ok(SupportValue { value: 0.0, witness: Hermitian::zeros(dims), exact: true, gap: 0.0 });
    }
    let n = x.dim();
    let nn = n * n;
    let ops = phase_point_operators(d, dims.len());
    let rho = Lmi::var(n, 0);
    let mut sdp = Sdp::new(2 * nn);
    sdp.objective = rho.inner(&x.scale(1.0 / scale).into_matrix()).scaled(-1.0).dense(2 * nn);
    let mut budget = LinIneq::constant(1.0);
    let rho0 = CMat::identity(n, n) * C64::new(0.5 / n as f64, 0.0);
    let mut x0 = hermitian_coords(&rho0);
    for (u, a) in ops.iter().enumerate() {
        let w = rho.inner(a).scaled(1.0 / n as f64);
        let t = LinIneq { constant: 0.0, coeffs: vec![(nn + u, 1.0)] };
        sdp.lin.push(t.plus(&w.scaled(-1.0)));
        sdp.lin.push(t.plus(&w));
        budget = budget.plus(&t.scaled(-1.0));
        let w0 = (a * &rho0).trace().re / n as f64;
        x0.push(w0.abs() + 0.1 / nn as f64);
    }
    sdp.lin.push(budget);
    sdp.lmis.push(rho.clone());
    let sol = sdp.solve(x0, SdpOptions::default())?;
    let witness = Hermitian::from_parts(rho.eval(&sol.x), dims.to_vec());
    Ok(SupportValue { value: x.inner(&witness), witness, exact: false, gap: sol.gap * scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_points_are_a_frame() {
        for d in [3, 5] {
            let ops = phase_point_operators(d, 1);
            let mut sum = CMat::zeros(d, d);
            for (i, a) in ops.iter().enumerate() {
                assert!((a.trace().re - 1.0).abs() < 1e-12);
                for (j, b) in ops.iter().enumerate() {
                    let ip = (a * b).trace().re;
                    let expect = if i == j { d as f64 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-10);
                }
                sum += a;
            }
            assert!((sum - CMat::identity(d, d) * C64::new(d as f64, 0.0)).norm() < 1e-10);
        }
        // stabilizer state |0⟩ has a nonnegative Wigner function
        let w = wigner(&Hermitian::diag(&[1.0, 0.0, 0.0]), 3).unwrap();
        assert!(w.iter().all(|&x| x > -1e-12));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
