//! Blended pairwise conditional gradients over a product of convex sets,
//! each known only through a linear minimization oracle.
//!
//! Iterates are kept as convex combinations of oracle atoms. A step either
//! moves weight between two active atoms (pairwise) or towards a fresh
//! oracle atom, whichever promises more decrease; the step length comes from
//! a safeguarded secant search on the directional derivative.

use crate::error::Result;
use crate::hermitian::Hermitian;

/// A convex set accessed through linear minimization.
pub trait LinearOracle {
    /// A member minimizing tr[g·x].
    fn argmin(&self, g: &Hermitian) -> Result<Hermitian>;
    /// True when the set has a single member, so no search is needed.
    fn is_point(&self) -> bool {
        false
    }
}

/// Objective value (None for +∞) and gradients per block.
pub struct Evaluation {
    pub value: Option<f64>,
    pub grads: Vec<Hermitian>,
}

pub trait Objective {
    /// `need_grad[b]` is false for blocks that cannot move.
    fn eval(&mut self, x: &[Hermitian], need_grad: &[bool]) -> Result<Evaluation>;

    /// Optional certified lower bound on the minimum, computed at the most
    /// recent evaluation point.
    fn dual_bound(&mut self, _x: &[Hermitian], _eval: &Evaluation) -> Result<Option<f64>> {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FwOptions {
    /// Stop when value − best lower bound ≤ tol.
    pub tol: f64,
    pub max_iter: usize,
    /// Line-search evaluations per step.
    pub max_line: usize,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 500, max_line: 30 }
    }
}

#[derive(Clone, Debug)]
pub struct FwResult {
    pub x: Vec<Hermitian>,
    pub value: Option<f64>,
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub atoms: Vec<Vec<(f64, Hermitian)>>,
}

struct Block {
    atoms: Vec<Hermitian>,
    weights: Vec<f64>,
}

impl Block {
    fn point(&self) -> Hermitian {
        let mut x = self.atoms[0].scale(self.weights[0]);
        for (a, w) in self.atoms.iter().zip(&self.weights).skip(1) {
            x = x.axpy(*w, a);
        }
        x
    }

    fn add_weight(&mut self, atom: &Hermitian, w: f64) {
        if let Some(k) = self.atoms.iter().position(|a| a.sub(atom).norm_fro() <= 1e-13 * (1.0 + a.norm_fro())) {
            self.weights[k] += w;
        } else {
            self.atoms.push(atom.clone());
            self.weights.push(w);
        }
    }

    fn prune(&mut self) {
        let total: f64 = self.weights.iter().sum();
        let mut k = 0;
        while k < self.atoms.len() {
            if self.weights[k] <= 1e-15 * total && self.atoms.len() > 1 {
                self.atoms.remove(k);
                self.weights.remove(k);
            } else {
                k += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
    }
}

/// Kind of move for one block.
enum Move {
    Stay,
    Pairwise { from: usize, to: usize },
    Toward(Hermitian),
}

/// Minimizes a convex objective over the product of the oracle sets,
/// starting from the given members.
pub fn minimize(
    obj: &mut dyn Objective,
    oracles: &[&dyn LinearOracle],
    start: Vec<Hermitian>,
    opts: FwOptions,
) -> Result<FwResult> {
    let nb = oracles.len();
    let mut blocks: Vec<Block> = start.into_iter().map(|x| Block { atoms: vec![x], weights: vec![1.0] }).collect();
    let need: Vec<bool> = oracles.iter().map(|o| !o.is_point()).collect();
    let mut x: Vec<Hermitian> = blocks.iter().map(Block::point).collect();
    let mut ev = obj.eval(&x, &need)?;
    let mut lower = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    if need.iter().all(|n| !n) {
        if let Some(v) = ev.value {
            lower = obj.dual_bound(&x, &ev)?.unwrap_or(v).max(f64::NEG_INFINITY);
        }
        return Ok(finish(blocks, x, ev.value, lower, 0, true));
    }

    loop {
        let Some(fx) = ev.value else {
            // infeasible start; nothing sensible to do
            break;
        };
        if let Some(d) = obj.dual_bound(&x, &ev)? {
            lower = lower.max(d);
        }
        let mut fw_atoms = Vec::with_capacity(nb);
        let mut fw_gap = 0.0;
        for b in 0..nb {
            if need[b] {
                let v = oracles[b].argmin(&ev.grads[b])?;
                fw_gap += ev.grads[b].inner(&x[b]) - ev.grads[b].inner(&v);
                fw_atoms.push(Some(v));
            } else {
                fw_atoms.push(None);
            }
        }
        lower = lower.max(fx - fw_gap);
        if fx - lower <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        // local pairwise candidates
        let mut local_gap = 0.0;
        let mut pairs = Vec::with_capacity(nb);
        for b in 0..nb {
            if !need[b] || blocks[b].atoms.len() < 2 {
                pairs.push(None);
                continue;
            }
            let scores: Vec<f64> = blocks[b].atoms.iter().map(|a| ev.grads[b].inner(a)).collect();
            let (mut away, mut best) = (0, 0);
            for k in 0..scores.len() {
                if scores[k] > scores[away] {
                    away = k;
                }
                if scores[k] < scores[best] {
                    best = k;
                }
            }
            local_gap += scores[away] - scores[best];
            pairs.push(Some((away, best)));
        }
        let pairwise = local_gap >= fw_gap && local_gap > 0.0;
        let moves: Vec<Move> = (0..nb)
            .map(|b| {
                if !need[b] {
                    Move::Stay
                } else if pairwise {
                    match pairs[b] {
                        Some((a, s)) if a != s => Move::Pairwise { from: a, to: s },
                        _ => Move::Stay,
                    }
                } else {
                    Move::Toward(fw_atoms[b].clone().expect("oracle atom"))
                }
            })
            .collect();
        let dirs: Vec<Hermitian> = (0..nb)
            .map(|b| match &moves[b] {
                Move::Stay => Hermitian::zeros(x[b].dims()),
                Move::Pairwise { from, to } => {
                    let bl = &blocks[b];
                    bl.atoms[*to].sub(&bl.atoms[*from]).scale(bl.weights[*from])
                }
                Move::Toward(v) => v.sub(&x[b]),
            })
            .collect();
        let slope0: f64 = (0..nb).map(|b| ev.grads[b].inner(&dirs[b])).sum();
        if slope0 >= 0.0 {
            break;
        }

        let (t, new_x, new_ev) = line_search(obj, &x, &dirs, &need, fx, slope0, opts.max_line)?;
        if t <= 0.0 {
            break;
        }
        for b in 0..nb {
            match &moves[b] {
                Move::Stay => {}
                Move::Pairwise { from, to } => {
                    let shift = t * blocks[b].weights[*from];
                    blocks[b].weights[*from] -= shift;
                    blocks[b].weights[*to] += shift;
                }
                Move::Toward(v) => {
                    for w in &mut blocks[b].weights {
                        *w *= 1.0 - t;
                    }
                    blocks[b].add_weight(v, t);
                }
            }
            blocks[b].prune();
        }
        x = new_x;
        ev = new_ev;
        let _ = &x;
    }
    Ok(finish(blocks, x, ev.value, lower, iterations, converged))
}

fn finish(blocks: Vec<Block>, x: Vec<Hermitian>, value: Option<f64>, lower: f64, iterations: usize, converged: bool) -> FwResult {
    let atoms = blocks.into_iter().map(|b| b.weights.into_iter().zip(b.atoms).collect()).collect();
    FwResult { x, value, lower_bound: lower, iterations, converged, atoms }
}

type Probe = (Vec<Hermitian>, Evaluation);

fn probe(obj: &mut dyn Objective, x: &[Hermitian], dirs: &[Hermitian], need: &[bool], t: f64) -> Result<Probe> {
    let xs: Vec<Hermitian> = x.iter().zip(dirs).map(|(a, d)| a.axpy(t, d)).collect();
    let ev = obj.eval(&xs, need)?;
    Ok((xs, ev))
}

fn slope(ev: &Evaluation, dirs: &[Hermitian], need: &[bool]) -> f64 {
    (0..dirs.len()).filter(|&b| need[b]).map(|b| ev.grads[b].inner(&dirs[b])).sum()
}

/// Minimizes φ(t) = F(x + t·d) over [0, 1] for convex φ with φ′(0) < 0.
fn line_search(
    obj: &mut dyn Objective,
    x: &[Hermitian],
    dirs: &[Hermitian],
    need: &[bool],
    f0: f64,
    s0: f64,
    max_line: usize,
) -> Result<(f64, Vec<Hermitian>, Evaluation)> {
    let (x1, e1) = probe(obj, x, dirs, need, 1.0)?;
    let s1 = e1.value.map(|_| slope(&e1, dirs, need));
    if let Some(s) = s1 {
        if s <= 0.0 {
            return Ok((1.0, x1, e1));
        }
    }
    let (mut lo, mut slo) = (0.0, s0);
    let (mut hi, mut shi) = (1.0, s1);
    let mut best: Option<(f64, f64, Vec<Hermitian>, Evaluation)> = e1.value.map(|v| (v, 1.0, x1, e1));
    for it in 0..max_line {
        let t = match shi {
            // secant on the derivative, kept away from the bracket ends
            Some(sh) if it % 3 != 2 => {
                let ts = lo - slo * (hi - lo) / (sh - slo);
                ts.clamp(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
            }
            _ => 0.5 * (lo + hi),
        };
        let (xt, et) = probe(obj, x, dirs, need, t)?;
        let st = et.value.map(|_| slope(&et, dirs, need));
        let vt = et.value;
        let done = matches!(st, Some(s) if s.abs() <= 1e-4 * s0.abs()) || hi - lo <= 1e-12;
        match st {
            Some(s) if s < 0.0 => {
                lo = t;
                slo = s;
            }
            _ => {
                hi = t;
                shi = st;
            }
        }
        if let Some(v) = vt {
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, t, xt, et));
            }
        }
        if done {
            break;
        }
    }
    match best {
        Some((v, t, xt, et)) if v <= f0 => Ok((t, xt, et)),
        _ => {
            let (xt, et) = probe(obj, x, dirs, need, 0.0)?;
            Ok((0.0, xt, et))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Probability simplex of diagonal 3×3 operators.
    struct Simplex;
    impl LinearOracle for Simplex {
        fn argmin(&self, g: &Hermitian) -> Result<Hermitian> {
            let d = g.diagonal();
            let k = (0..d.len()).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
            let mut v = vec![0.0; d.len()];
            v[k] = 1.0;
            Ok(Hermitian::diag(&v))
        }
    }

    /// ‖x − target‖²_F
    struct Dist(Hermitian);
    impl Objective for Dist {
        fn eval(&mut self, x: &[Hermitian], _: &[bool]) -> Result<Evaluation> {
            let r = x[0].sub(&self.0);
            Ok(Evaluation { value: Some(r.inner(&r)), grads: vec![r.scale(2.0)] })
        }
    }

    #[test]
    fn projects_onto_simplex() {
        let target = Hermitian::diag(&[0.5, 0.6, -0.3]);
        let mut obj = Dist(target);
        let start = Hermitian::diag(&[0.0, 0.0, 1.0]);
        let r = minimize(&mut obj, &[&Simplex], vec![start], FwOptions { tol: 1e-12, ..Default::default() }).unwrap();
        assert!(r.converged);
        let d = r.x[0].diagonal();
        assert!((d[0] - 0.45).abs() < 1e-6 && (d[1] - 0.55).abs() < 1e-6 && d[2].abs() < 1e-6, "{d:?}");
    }
}
