//! h(X) for the Rains set as a small SDP in the split ρ^Γ = P − N.

use super::SupportValue;
use crate::error::Result;
use crate::hermitian::{CMat, Hermitian, C64};
use crate::optim::barrier::{hermitian_coords, LinIneq, Lmi, Sdp, SdpOptions};

/// max tr[X ρ] over ρ ⪰ 0 with ρ^Γ = P − N, P, N ⪰ 0, tr P + tr N ≤ 1.
pub(super) fn support(dims: &[usize], transposed: &[bool], x: &Hermitian) -> Result<SupportValue> {
    let subs: Vec<usize> = (0..dims.len()).filter(|&k| transposed[k]).collect();
    let ev = x.eigenvalues()?;
    let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if ev[ev.len() - 1] <= 1e-13 * scale {
        // zero is a member and every member is PSD
        return Ok(SupportValue { value: 0.0, witness: Hermitian::zeros(dims), exact: true, gap: 0.0 });
    }
    let n = x.dim();
    let nn = n * n;
    let pt = |m: &CMat| Hermitian::from_parts(m.clone(), dims.to_vec()).partial_transpose(&subs).expect("factors").into_matrix();
    let p = Lmi::var(n, 0);
    let q = Lmi::var(n, nn);
    let diff = p.minus(&q);
    let rho = diff.map(pt);
    let c = pt(&x.scale(1.0 / scale).into_matrix());
    let mut sdp = Sdp::new(2 * nn);
    sdp.objective = diff.inner(&c).scaled(-1.0).dense(2 * nn);
    sdp.lin.push(LinIneq::constant(1.0).plus(&p.trace().scaled(-1.0)).plus(&q.trace().scaled(-1.0)));
    sdp.lmis.extend([p, q, rho.clone()]);
    let (a, b) = (0.6 / n as f64, 0.2 / n as f64);
    let mut x0 = hermitian_coords(&(CMat::identity(n, n) * C64::new(a, 0.0)));
    x0.extend(hermitian_coords(&(CMat::identity(n, n) * C64::new(b, 0.0))));
    let sol = sdp.solve(x0, SdpOptions::default())?;
    let witness = Hermitian::from_parts(rho.eval(&sol.x), dims.to_vec());
    Ok(SupportValue { value: x.inner(&witness), witness, exact: false, gap: sol.gap * scale })
}
