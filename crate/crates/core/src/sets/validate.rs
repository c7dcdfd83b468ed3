//! Sampled checks of permutation invariance, tensor stability and
//! sub-multiplicativity of the support function for a family of sets.

use crate::tolerances::Tol;
use super::{SetFamily};
use crate::error::Result;
use crate::hermitian::Hermitian;
use crate::random;
use rand::seq::SliceRandom;
use serde::Serialize;


#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    /// "permutation", "product" or "multiplicativity".
    pub property: &'static str,
    pub detail: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub m: usize,
    pub k: usize,
    pub samples: usize,
    pub permutation_checks: usize,
    pub product_checks: usize,
    pub multiplicativity_checks: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

fn sample_psd(dims: &[usize], i: usize, rng: &mut random::SeededRng) -> Hermitian {
    let n: usize = dims.iter().product();
    let x = match i % 3 {
        0 => random::psd(n, rng),
        1 => random::pure(n, rng),
        _ => random::density_rank(n, (n / 2).max(1), rng),
    };
    x.with_dims(dims.to_vec()).expect("dims")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= Tol::Assumption.get() * a.abs().max(b.abs()) + 1e-12
}

/// Checks A_{m+k} against A_m and A_k on `samples` random inputs each.
/// Passing is evidence, not proof.
pub fn validate_assumptions(family: &SetFamily, m: usize, k: usize, samples: usize, seed: u64) -> Result<AssumptionReport> {
    let am = family.at(m)?;
    let ak = family.at(k)?;
    let an = family.at(m + k)?;
    let per_copy = family.local_dims().len();
    let copies = m + k;
    let mut rng = random::rng(seed);
    let mut violations = Vec::new();
    let mut report = AssumptionReport {
        m,
        k,
        samples,
        permutation_checks: 0,
        product_checks: 0,
        multiplicativity_checks: 0,
        violations: Vec::new(),
        passed: true,
    };

    if copies >= 2 {
        for i in 0..samples {
            let x = sample_psd(an.dims(), i, &mut rng);
            let mut order: Vec<usize> = (0..copies).collect();
            while order.iter().enumerate().all(|(a, &b)| a == b) {
                order.shuffle(&mut rng);
            }
            let perm: Vec<usize> = order.iter().flat_map(|&c| (0..per_copy).map(move |f| c * per_copy + f)).collect();
            let px = x.permute_subsystems(&perm)?;
            let (a, b) = (an.max_linear(&x)?.value, an.max_linear(&px)?.value);
            report.permutation_checks += 1;
            if !close(a, b) {
                violations.push(Violation { property: "permutation", detail: format!("copy order {order:?}"), lhs: b, rhs: a });
            }
        }
    }

    for i in 0..samples {
        let pick = |s: &super::StateSet, rng: &mut random::SeededRng| -> Result<Hermitian> {
            if i == 0 {
                return Ok(s.interior_point());
            }
            let g = random::hermitian(s.dim(), rng).with_dims(s.dims().to_vec())?;
            Ok(s.max_linear(&g)?.witness)
        };
        let a = pick(&am, &mut rng)?;
        let b = pick(&ak, &mut rng)?;
        report.product_checks += 1;
        let ab = a.kron(&b)?;
        if !an.contains(&ab, Tol::Witness.get())? {
            violations.push(Violation { property: "product", detail: format!("product of sample {i} is not a member"), lhs: ab.trace(), rhs: 0.0 });
        }
    }

    for i in 0..samples {
        let x1 = sample_psd(am.dims(), i, &mut rng);
        let x2 = sample_psd(ak.dims(), i + 1, &mut rng);
        let lhs = an.max_linear(&x1.kron(&x2)?)?.value;
        let rhs = am.max_linear(&x1)?.value * ak.max_linear(&x2)?.value;
        report.multiplicativity_checks += 1;
        if lhs > rhs * (1.0 + Tol::Assumption.get()) + 1e-12 {
            violations.push(Violation { property: "multiplicativity", detail: format!("sample {i}"), lhs, rhs });
        }
    }
    report.passed = violations.is_empty();
    report.violations = violations;
    Ok(report)
}
