//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use nalgebra::DMatrix;
use num_complex::Complex64;
use setdiv::aep::{aep_sandwich, gap_guarantee, iid_pair, regularized_estimate};
use setdiv::divergences::{beta_and_dhypo, classical_renyi, dmin, ns_distributions, petz, sandwiched, umegaki};
use setdiv::hermitian::spec_count;
use setdiv::measured::{dm, dm_alpha};
use setdiv::random::{self, SeededRng};
use setdiv::setdiv::{dhypo_sets, superadditivity_check};
use setdiv::sets::{SetFamily, StateSet};
use setdiv::stein::{build_rng_protocol, protocol_audit, rate_bounds, stein_table};
use setdiv::{Hermitian, Value};
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fin(v: Value) -> f64 {
    v.to_f64()
}

fn lib<T>(r: setdiv::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// oracles

/// D(ρ‖σ) from dense eigendecompositions, in bits.
fn oracle_umegaki(rho: &Hermitian, sigma: &Hermitian) -> f64 {
    let log = |h: &Hermitian| -> DMatrix<Complex64> {
        let e = h.matrix().clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| Complex64::new(x.max(1e-300).log2(), 0.0)));
        &e.eigenvectors * d * e.eigenvectors.adjoint()
    };
    let diff = log(rho) - log(sigma);
    (rho.matrix() * diff).trace().re
}

/// min Σ q_i t_i subject to Σ p_i t_i ≥ 1 − ε, t ∈ [0,1]^d, by enumerating
/// the vertices of the feasible polytope that can be optimal: a 0/1 vector
/// plus at most one fractional coordinate.
fn neyman_pearson_exhaustive(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let d = p.len();
    let need = 1.0 - eps;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << d) {
        let (ps, qs): (f64, f64) = (0..d).filter(|i| mask >> i & 1 == 1).fold((0.0, 0.0), |(a, b), i| (a + p[i], b + q[i]));
        if ps >= need {
            best = best.min(qs);
            continue;
        }
        for j in (0..d).filter(|j| mask >> j & 1 == 0) {
            if p[j] > 0.0 {
                let t = (need - ps) / p[j];
                if t <= 1.0 {
                    best = best.min(qs + t * q[j]);
                }
            }
        }
    }
    best
}

/// Real qubit state from Bloch coordinates in the X–Z plane.
fn real_qubit(x: f64, z: f64) -> Hermitian {
    let m = DMatrix::from_row_slice(2, 2, &[0.5 * (1.0 + z), 0.5 * x, 0.5 * x, 0.5 * (1.0 - z)]).map(|v| Complex64::new(v, 0.0));
    Hermitian::new(m, vec![2]).unwrap()
}

/// Outcome probabilities of the real basis whose Bloch direction makes angle
/// θ with the Z axis; θ ∈ [0, π) covers every real basis once.
fn basis_probs(b: (f64, f64), theta: f64) -> (f64, f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let along = c * b.1 + s * b.0;
    (0.5 * (1.0 + along), 0.5 * (1.0 - along))
}

/// Points of the simplex over `k` generators: 200 on a segment, a
/// triangular grid of 210 for three.
fn simplex_grid(k: usize) -> Vec<Vec<f64>> {
    match k {
        1 => vec![vec![1.0]],
        2 => (0..200).map(|i| {
            let t = i as f64 / 199.0;
            vec![t, 1.0 - t]
        })
        .collect(),
        3 => {
            let n = 19;
            let mut out = Vec::new();
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                    out.push(vec![a, b, 1.0 - a - b]);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

/// sup over grid pairs of min over 720 real test bases of the two-outcome
/// Neyman–Pearson value; returns −log β.
fn grid_dhypo(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> f64 {
    let mix = |g: &[(f64, f64)], w: &[f64]| w.iter().zip(g).fold((0.0, 0.0), |acc, (c, p)| (acc.0 + c * p.0, acc.1 + c * p.1));
    let thetas: Vec<f64> = (0..720).map(|i| std::f64::consts::PI * i as f64 / 720.0).collect();
    let ga: Vec<_> = simplex_grid(a.len()).iter().map(|w| mix(a, w)).collect();
    let gb: Vec<_> = simplex_grid(b.len()).iter().map(|w| mix(b, w)).collect();
    let mut beta = 0.0f64;
    for r in &ga {
        for s in &gb {
            let mut inner = f64::INFINITY;
            for &t in &thetas {
                let (p, q) = (basis_probs(*r, t), basis_probs(*s, t));
                inner = inner.min(neyman_pearson_exhaustive(&[p.0, p.1], &[q.0, q.1], eps));
            }
            beta = beta.max(inner);
        }
    }
    -beta.log2()
}

fn random_pairs(n: usize, dims: &[usize], rng: &mut SeededRng) -> Vec<(Hermitian, Hermitian)> {
    (0..n)
        .map(|i| {
            let d = dims[i % dims.len()];
            (random::density(d, rng), random::density(d, rng))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// criteria

fn c1_ordering_chain() -> Check {
    let mut rng = random::rng(101);
    let mut worst = f64::INFINITY;
    for (rho, sigma) in random_pairs(200, &[2, 3], &mut rng) {
        let chain = [
            fin(lib(dmin(&rho, &sigma))?.value),
            fin(lib(dm_alpha(0.5, &rho, &sigma))?.value),
            fin(lib(dm(&rho, &sigma))?.value),
            fin(lib(umegaki(&rho, &sigma))?.value),
        ];
        for w in chain.windows(2) {
            worst = worst.min(w[1] - w[0]);
        }
    }
    ensure(worst >= -1e-6, || format!("smallest step {worst:e}"))?;
    Ok(format!("smallest step {worst:.3e}"))
}

fn c2_nussbaum_szkola() -> Check {
    let mut rng = random::rng(202);
    let mut worst = 0.0f64;
    for (rho, sigma) in random_pairs(100, &[2, 3], &mut rng) {
        let (p, q) = lib(ns_distributions(&rho, &sigma))?;
        for alpha in [0.3, 0.5, 0.9, 1.5, 2.0] {
            let quantum = fin(lib(petz(alpha, &rho, &sigma))?.value);
            let classical = fin(lib(classical_renyi(alpha, &p, &q))?);
            // direct sum, independent of the library's classical routine
            let s: f64 = p.iter().zip(&q).map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha)).sum();
            let direct = s.log2() / (alpha - 1.0);
            worst = worst.max((quantum - classical).abs()).max((classical - direct).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn c3_one_shot_equivalence() -> Check {
    let mut rng = random::rng(303);
    let mut worst = f64::INFINITY;
    for (rho, sigma) in random_pairs(100, &[2], &mut rng) {
        let p07 = fin(lib(petz(0.7, &rho, &sigma))?.value);
        let s15 = fin(lib(sandwiched(1.5, &rho, &sigma))?.value);
        for eps in [0.1f64, 0.5] {
            let dh = fin(lib(beta_and_dhypo(eps, &rho, &sigma))?.dh);
            let floor = p07 - 0.7 / 0.3 * (1.0 / eps).log2();
            let ceiling = s15 + 3.0 * (1.0 / (1.0 - eps)).log2();
            worst = worst.min(dh - floor).min(ceiling - dh);
        }
    }
    ensure(worst >= -1e-6, || format!("smallest margin {worst:e}"))?;
    Ok(format!("smallest margin {worst:.3e}"))
}

fn c4_beta_primal_dual() -> Check {
    let mut rng = random::rng(404);
    let mut worst = 0.0f64;
    for (i, (rho, sigma)) in random_pairs(100, &[2, 3], &mut rng).into_iter().enumerate() {
        let eps = [0.05, 0.2, 0.5][i % 3];
        let h = lib(beta_and_dhypo(eps, &rho, &sigma))?;
        let primal = sigma.inner(&h.test.m);
        worst = worst.max((primal - h.beta).abs());
    }
    ensure(worst <= 1e-8, || format!("primal/dual gap {worst:e}"))?;
    let mut worst_cl = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 4;
        let p = random::dirichlet(d, &mut rng);
        let q = random::dirichlet(d, &mut rng);
        let eps = [0.1, 0.3, 0.6][i % 3];
        let h = lib(beta_and_dhypo(eps, &Hermitian::diag(&p), &Hermitian::diag(&q)))?;
        worst_cl = worst_cl.max((h.beta - neyman_pearson_exhaustive(&p, &q, eps)).abs());
    }
    ensure(worst_cl <= 1e-9, || format!("classical deviation {worst_cl:e}"))?;
    Ok(format!("primal/dual {worst:.2e}, classical {worst_cl:.2e}"))
}

fn c5_aep_sandwich() -> Check {
    let mut rng = random::rng(505);
    let (rho, sigma) = (random::density(2, &mut rng), random::density(2, &mut rng));
    let d = oracle_umegaki(&rho, &sigma);
    let (a, b) = lib(iid_pair(&rho, &sigma))?;
    let mut prev = f64::NEG_INFINITY;
    let mut notes = Vec::new();
    for m in 1..=3 {
        let r = lib(aep_sandwich(&a, &b, m))?;
        let (lo, hi) = (fin(r.lower), fin(r.upper));
        ensure(lo >= prev, || format!("lower decreased at m={m}: {prev} -> {lo}"))?;
        ensure((hi - d).abs() <= 1e-6, || format!("upper {hi} vs D {d} at m={m}"))?;
        ensure(hi - lo <= gap_guarantee(2, m) + 1e-4, || format!("gap {} at m={m}", hi - lo))?;
        prev = lo;
        notes.push(format!("m={m}: [{lo:.6}, {hi:.6}]"));
    }
    Ok(notes.join(" "))
}

fn c6_superadditivity() -> Check {
    let mut rng = random::rng(606);
    let a = SetFamily::Iid(lib(StateSet::singleton(random::density(4, &mut rng).with_dims(vec![2, 2]).unwrap()))?);
    let b = SetFamily::Iid(lib(StateSet::conditional(2, 2))?);
    let mut notes = Vec::new();
    for (m, k) in [(1, 1), (1, 2)] {
        let r = lib(superadditivity_check(&a, &b, m, k, None))?;
        ensure(r.difference >= -5e-5, || format!("(m,k)=({m},{k}): difference {:e}", r.difference))?;
        notes.push(format!("({m},{k}): {:.3e}", r.difference));
    }
    Ok(notes.join(" "))
}

fn c7_pinching() -> Check {
    let mut rng = random::rng(707);
    let mut worst = f64::INFINITY;
    for (rho, sigma) in random_pairs(100, &[2, 3], &mut rng) {
        let count = lib(spec_count(&sigma, 1e-8))?;
        for alpha in [0.6, 1.0, 2.0] {
            let (m, s) = if alpha == 1.0 {
                (fin(lib(dm(&rho, &sigma))?.value), fin(lib(umegaki(&rho, &sigma))?.value))
            } else {
                (fin(lib(dm_alpha(alpha, &rho, &sigma))?.value), fin(lib(sandwiched(alpha, &rho, &sigma))?.value))
            };
            let upper = m + 2.0 * (count as f64).log2() + 1e-6;
            worst = worst.min(s - m + 1e-6).min(upper - s);
        }
    }
    ensure(worst >= 0.0, || format!("smallest margin {worst:e}"))?;
    Ok(format!("smallest margin {worst:.3e}"))
}

fn c8_continuity() -> Check {
    let mut rng = random::rng(808);
    let mut worst = f64::INFINITY;
    for (rho, sigma) in random_pairs(100, &[2], &mut rng) {
        let d = fin(lib(umegaki(&rho, &sigma))?.value);
        let p32 = fin(lib(petz(1.5, &rho, &sigma))?.value);
        let p12 = fin(lib(petz(0.5, &rho, &sigma))?.value);
        let eta = |k: f64| {
            let r = f64::max(4.0, (k * p32).exp2() + (-k * p12).exp2() + 1.0);
            (r * r).log2()
        };
        let (le, le_up) = (eta(2.0), eta(1.0));
        let alpha = 1.0 - 0.5 / le;
        let alpha_up = 1.0 + 0.5 / le_up;
        let gap = d - fin(lib(petz(alpha, &rho, &sigma))?.value);
        let up = fin(lib(sandwiched(alpha_up, &rho, &sigma))?.value);
        worst = worst.min(gap + 1e-8).min((1.0 - alpha) * le * le - gap + 1e-8).min(d + (alpha_up - 1.0) * le_up * le_up - up + 1e-8);
    }
    ensure(worst >= 0.0, || format!("smallest margin {worst:e}"))?;
    Ok(format!("smallest margin {worst:.3e}"))
}

fn c9_composite_minimax() -> Check {
    let mut rng = random::rng(909);
    let bloch = |rng: &mut SeededRng| {
        let r = 0.9 * rand::Rng::random::<f64>(rng).sqrt();
        let t = std::f64::consts::TAU * rand::Rng::random::<f64>(rng);
        (r * t.cos(), r * t.sin())
    };
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (ka, kb) in [(2, 2), (3, 2), (2, 3)] {
        let ga: Vec<_> = (0..ka).map(|_| bloch(&mut rng)).collect();
        let gb: Vec<_> = (0..kb).map(|_| bloch(&mut rng)).collect();
        let hull = |g: &[(f64, f64)]| StateSet::hull(g.iter().map(|&(x, z)| real_qubit(x, z)).collect());
        let h = lib(dhypo_sets(0.3, &lib(hull(&ga))?, &lib(hull(&gb))?))?;
        let got = fin(h.result.value);
        let want = grid_dhypo(&ga, &gb, 0.3);
        worst = worst.max((got - want).abs());
        notes.push(format!("{ka}x{kb}: {got:.5} vs {want:.5}"));
    }
    ensure(worst <= 5e-3, || format!("deviation {worst:e}; {}", notes.join(", ")))?;
    Ok(notes.join(", "))
}

fn c10_rains_support() -> Check {
    let mut notes = Vec::new();
    for d in [2usize, 3] {
        let mut v = vec![0.0; d * d];
        for i in 0..d {
            v[i * d + i] = 1.0 / (d as f64).sqrt();
        }
        let phi = Hermitian::pure_real(&v).with_dims(vec![d, d]).unwrap();
        let h = lib(lib(StateSet::rains(d, d))?.max_linear(&phi))?.value;
        ensure((h - 1.0 / d as f64).abs() <= 1e-6, || format!("d={d}: {h}"))?;
        notes.push(format!("d={d}: {h:.9}"));
    }
    Ok(notes.join(" "))
}

fn uniform(d: usize) -> Hermitian {
    Hermitian::pure_real(&vec![1.0 / (d as f64).sqrt(); d])
}

fn c11_coherence() -> Check {
    let plus2 = SetFamily::Iid(lib(StateSet::singleton(uniform(2)))?);
    let plus3 = SetFamily::Iid(lib(StateSet::singleton(uniform(3)))?);
    let inc2 = SetFamily::Iid(lib(StateSet::incoherent(vec![2]))?);
    let inc3 = SetFamily::Iid(lib(StateSet::incoherent(vec![3]))?);
    let est = lib(regularized_estimate(&plus2, &inc2, 2))?;
    ensure(est.contains(1.0), || format!("[{}, {}] misses 1", est.best_lower, est.best_upper))?;
    ensure(est.width() <= gap_guarantee(2, 2), || format!("width {}", est.width()))?;
    let r = lib(rate_bounds(&plus2, &plus3, &inc2, &inc3, 2))?;
    let want = 1.0 / 3f64.log2();
    ensure(r.rate_interval.contains(want), || format!("rate [{}, {}] misses {want}", r.rate_interval.lo, r.rate_interval.hi))?;
    Ok(format!(
        "D in [{:.6}, {:.6}], rate in [{:.6}, {:.6}]",
        fin(est.best_lower),
        fin(est.best_upper),
        r.rate_interval.lo,
        r.rate_interval.hi
    ))
}

fn c12_stein_table() -> Check {
    let mut rng = random::rng(1212);
    let (rho, sigma) = (random::density(2, &mut rng), random::density(2, &mut rng));
    let (a, b) = lib(iid_pair(&rho, &sigma))?;
    let t = lib(stein_table(&a, &b, 0.3, 5))?;
    for r in &t.rows {
        let x = fin(r.dh_per_n);
        ensure(r.petz_floor <= x && x <= r.sandwich_ceiling, || format!("n={}: {x} outside [{}, {}]", r.n, r.petz_floor, r.sandwich_ceiling))?;
    }
    let widths: Vec<f64> = t.rows.iter().map(|r| r.sandwich_ceiling - r.petz_floor).collect();
    ensure(widths.windows(2).all(|w| w[1] <= w[0]), || format!("widths {widths:?}"))?;
    Ok(format!("widths {}", widths.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>().join(" ")))
}

fn c13_protocol_audit() -> Check {
    let f = SetFamily::Iid(lib(StateSet::incoherent(vec![2]))?);
    let null = SetFamily::Iid(lib(StateSet::singleton(Hermitian::diag(&[0.8, 0.2])))?);
    let p = lib(build_rng_protocol(&null, &f, &null, 1, 1, 0.2, 0.1))?;
    let audit = lib(protocol_audit(&p, &null, &null, &f, 16, 13))?;
    let viol = fin(audit.rng_violation);
    ensure(audit.trans_error <= 0.2 + 5e-3, || format!("null trans_error {}", audit.trans_error))?;
    ensure(viol <= 5e-3, || format!("null rng_violation {viol}"))?;
    let plus = SetFamily::Iid(lib(StateSet::singleton(uniform(2)))?);
    let p = lib(build_rng_protocol(&plus, &f, &plus, 1, 1, 0.2, 0.1))?;
    let res = lib(protocol_audit(&p, &plus, &plus, &f, 16, 13))?;
    ensure(res.rng_violation.is_finite(), || "resourceful rng_violation is infinite".into())?;
    Ok(format!(
        "null: trans {:.4} viol {:.2e}; resourceful: trans {:.4} viol {:.4}",
        audit.trans_error,
        viol,
        res.trans_error,
        fin(res.rng_violation)
    ))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let criteria = [
        Criterion { id: "C1", name: "ordering chain", limit: min(2), run: c1_ordering_chain },
        Criterion { id: "C2", name: "Nussbaum-Szkola oracle", limit: min(1), run: c2_nussbaum_szkola },
        Criterion { id: "C3", name: "one-shot equivalence", limit: min(2), run: c3_one_shot_equivalence },
        Criterion { id: "C4", name: "beta primal/dual", limit: min(1), run: c4_beta_primal_dual },
        Criterion { id: "C5", name: "AEP sandwich", limit: min(5), run: c5_aep_sandwich },
        Criterion { id: "C6", name: "superadditivity", limit: min(5), run: c6_superadditivity },
        Criterion { id: "C7", name: "pinching bound", limit: min(3), run: c7_pinching },
        Criterion { id: "C8", name: "continuity envelopes", limit: min(1), run: c8_continuity },
        Criterion { id: "C9", name: "composite minimax", limit: min(10), run: c9_composite_minimax },
        Criterion { id: "C10", name: "Rains support value", limit: min(1), run: c10_rains_support },
        Criterion { id: "C11", name: "coherence end-to-end", limit: min(10), run: c11_coherence },
        Criterion { id: "C12", name: "Stein table", limit: min(10), run: c12_stein_table },
        Criterion { id: "C13", name: "RNG protocol audit", limit: min(3), run: c13_protocol_audit },
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !only.is_empty() && !only.iter().any(|o| o.eq_ignore_ascii_case(c.id)) {
            continue;
        }
        let t0 = Instant::now();
        let out = (c.run)();
        let el = t0.elapsed();
        let (ok, detail) = match out {
            Ok(d) if el <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.limit)),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {:<4} {:<24} {:>7.1}s  {}", if ok { "PASS" } else { "FAIL" }, c.id, c.name, el.as_secs_f64(), detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
