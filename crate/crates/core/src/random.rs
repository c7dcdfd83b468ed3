//! Seeded random operators for sampling-based checks and tests.

use crate::hermitian::{CMat, Hermitian, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary via QR with the phase correction.
pub fn unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, c)] *= phase;
        }
    }
    q
}

/// Hilbert–Schmidt random density operator of the given rank.
pub fn density_rank(n: usize, rank: usize, rng: &mut impl Rng) -> Hermitian {
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let h = Hermitian::from_parts(m, vec![n]);
    let t = h.trace();
    h.scale(1.0 / t)
}

/// Full-rank random density operator.
pub fn density(n: usize, rng: &mut impl Rng) -> Hermitian {
    density_rank(n, n, rng)
}

/// Full-rank density operator with smallest eigenvalue at least `floor / n`
/// (mixed with the maximally mixed state).
pub fn density_bounded(n: usize, floor: f64, rng: &mut impl Rng) -> Hermitian {
    let rho = density(n, rng);
    rho.scale(1.0 - floor).add(&Hermitian::maximally_mixed(&[n]).scale(floor))
}

pub fn pure(n: usize, rng: &mut impl Rng) -> Hermitian {
    density_rank(n, 1, rng)
}

/// Gaussian Hermitian matrix (GUE-like normalization).
pub fn hermitian(n: usize, rng: &mut impl Rng) -> Hermitian {
    let g = ginibre(n, n, rng);
    Hermitian::from_parts((&g + g.adjoint()) * C64::new(0.5, 0.0), vec![n])
}

/// Random PSD operator G G† with unit trace scale.
pub fn psd(n: usize, rng: &mut impl Rng) -> Hermitian {
    density(n, rng).scale(n as f64)
}

/// Diagonal density operator with Dirichlet(1,…,1) weights.
pub fn diagonal_density(n: usize, rng: &mut impl Rng) -> Hermitian {
    let w = dirichlet(n, rng);
    Hermitian::diag(&w)
}

/// Uniform point of the probability simplex.
pub fn dirichlet(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Kraus operators of a random channel from `d_in` to `d_out`, obtained
/// from a Haar isometry into `d_out ⊗ env` followed by tracing out `env`.
pub fn channel_kraus(d_in: usize, d_out: usize, env: usize, rng: &mut impl Rng) -> Vec<CMat> {
    let u = unitary(d_out * env, rng);
    (0..env)
        .map(|e| CMat::from_fn(d_out, d_in, |i, j| u[(i * env + e, j)]))
        .collect()
}

/// Applies a channel given by Kraus operators.
pub fn apply_kraus(kraus: &[CMat], x: &Hermitian) -> Hermitian {
    let d_out = kraus[0].nrows();
    let mut acc = CMat::zeros(d_out, d_out);
    for k in kraus {
        acc += k * x.matrix() * k.adjoint();
    }
    Hermitian::from_parts(acc, vec![d_out])
}
