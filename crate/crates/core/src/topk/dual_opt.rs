//! k-support norms as `max <x, y>` over the top-k unit ball
//! `{ x : ||x_K|| <= 1 for all |K| = k }`.
//!
//! Weighted ℓp sources go through a log-barrier Newton method: the
//! constraints only see `|x|`, so with `s = |x|` the problem becomes
//! `max <s, |y|>` subject to `sum_{i in K} (w_i s_i)^p <= 1` and `s >= 0`
//! (for `p = ∞`, `w_i s_i <= 1`). Atomic sources give linear programs and are
//! solved exactly by simplex.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::norms::{Exponent, NormKind, NormSpec};
use crate::solvers::{LinearProgram, Relation, Sense};
use crate::vectors::{dot, subsets_of_size, subsets_of_size_at_most, IndexSet, Vector};

pub(super) fn solve(source: &NormSpec, k: usize, y: &[f64], tol: f64) -> Result<f64> {
    let d = y.len();
    match source.kind() {
        NormKind::Lp { p } => lp_family(*p, &vec![1.0; d], k, y, tol),
        NormKind::WeightedLp { p, w } => lp_family(*p, w.as_slice(), k, y, tol),
        NormKind::Atomic { atoms } => atomic(atoms, k, y),
    }
}

fn lp_family(p: Exponent, w: &[f64], k: usize, y: &[f64], tol: f64) -> Result<f64> {
    let d = y.len();
    let c: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let (p, sets): (f64, Vec<Vec<usize>>) = match p {
        // max_{i in K} w_i s_i <= 1 over all K only bounds each coordinate
        Exponent::Infinity => (1.0, (0..d).map(|i| vec![i]).collect()),
        Exponent::Finite(p) => (p, subsets_of_size(d, k)?.map(|s| s.members().to_vec()).collect()),
    };
    let scale = c.iter().fold(0.0f64, |m, v| m.max(*v));
    let c: Vec<f64> = c.iter().map(|v| v / scale).collect();
    Ok(scale * Barrier::new(p, w, &sets, &c).solve(tol)?)
}

/// `x_K = sum_a lambda_{K,a} a` with `sum_a lambda_{K,a} <= 1` for every
/// `1 <= |K| <= k`. Without orthant-monotonicity a smaller `K` is not implied
/// by a larger one, so all sizes up to `k` are constrained.
fn atomic(atoms: &[Vector], k: usize, y: &[f64]) -> Result<f64> {
    let d = y.len();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x: Vec<usize> = y
        .iter()
        .map(|&yi| lp.add_var(yi, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for set in subsets_of_size_at_most(d, k)?.filter(|s: &IndexSet| !s.is_empty()) {
        let lambdas: Vec<usize> = atoms.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        lp.add_row(lambdas.iter().map(|&l| (l, 1.0)).collect(), Relation::Le, 1.0);
        for i in 0..d {
            let mut terms: Vec<(usize, f64)> = lambdas
                .iter()
                .zip(atoms)
                .filter(|(_, a)| a[i] != 0.0)
                .map(|(&l, a)| (l, -a[i]))
                .collect();
            if set.contains(i) {
                terms.push((x[i], 1.0));
            }
            lp.add_row(terms, Relation::Eq, 0.0);
        }
    }
    let value = lp.solve_simplex()?.objective;
    debug_assert!(value >= -1e-12 * dot(y, y).sqrt());
    Ok(value.max(0.0))
}

const MAX_OUTER: usize = 60;
const MAX_NEWTON: usize = 200;
const GROWTH: f64 = 50.0;
/// Newton decrement at which a point counts as centered.
const CENTERED: f64 = 1e-12;

fn pow(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v * v
    } else {
        v.powf(p)
    }
}

/// Barrier path for `max <c, s>` s.t. `g_K(s) = sum_{i in K} u_i s_i^p < 1`,
/// `s > 0`, with `u_i = w_i^p` and `c >= 0` scaled to `max c = 1`.
struct Barrier<'a> {
    p: f64,
    u: Vec<f64>,
    sets: &'a [Vec<usize>],
    c: &'a [f64],
}

impl<'a> Barrier<'a> {
    fn new(p: f64, w: &[f64], sets: &'a [Vec<usize>], c: &'a [f64]) -> Self {
        Barrier {
            p,
            u: w.iter().map(|wi| wi.powf(p)).collect(),
            sets,
            c,
        }
    }

    /// `u_i s_i^p` per coordinate, shared by every constraint.
    fn terms(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.u).map(|(&v, &u)| u * pow(v, self.p)).collect()
    }

    fn slacks<'b>(&'b self, terms: &'b [f64]) -> impl Iterator<Item = f64> + 'b {
        self.sets.iter().map(move |set| 1.0 - set.iter().map(|&i| terms[i]).sum::<f64>())
    }

    fn feasible(&self, s: &[f64]) -> bool {
        s.iter().all(|&v| v > 0.0) && self.slacks(&self.terms(s)).all(|slack| slack > 0.0)
    }

    fn objective(&self, s: &[f64]) -> f64 {
        dot(self.c, s)
    }

    fn value(&self, s: &[f64], t: f64) -> f64 {
        let slack: f64 = self.slacks(&self.terms(s)).map(f64::ln).sum();
        let positivity: f64 = s.iter().map(|v| v.ln()).sum();
        -t * self.objective(s) - slack - positivity
    }

    fn derivatives(&self, s: &[f64], t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let d = s.len();
        let p = self.p;
        let terms = self.terms(s);
        // first and second derivatives of u_i s_i^p
        let dg: Vec<f64> = (0..d).map(|i| p * terms[i] / s[i]).collect();
        let d2g: Vec<f64> = (0..d).map(|i| (p - 1.0) * dg[i] / s[i]).collect();
        let mut grad = DVector::from_fn(d, |i, _| -t * self.c[i] - 1.0 / s[i]);
        let mut hess = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 / (s[i] * s[i]) } else { 0.0 });
        for (set, slack) in self.sets.iter().zip(self.slacks(&terms)) {
            let inv = 1.0 / slack;
            let inv2 = inv * inv;
            for &i in set {
                grad[i] += dg[i] * inv;
                hess[(i, i)] += d2g[i] * inv;
                for &j in set {
                    hess[(i, j)] += dg[i] * dg[j] * inv2;
                }
            }
        }
        (grad, hess)
    }

    fn start(&self) -> Vec<f64> {
        let d = self.c.len();
        let worst = self
            .sets
            .iter()
            .map(|set| set.iter().map(|&i| self.u[i]).sum::<f64>())
            .fold(0.0f64, f64::max);
        vec![0.5 / worst.powf(1.0 / self.p); d]
    }

    /// Runs the barrier path until the certified gap `m / t` is below
    /// `tol * <c, s>`, and returns the (feasible, hence lower-bound) objective.
    fn solve(&self, tol: f64) -> Result<f64> {
        let m = (self.sets.len() + self.c.len()) as f64;
        let mut s = self.start();
        let mut t = m / self.objective(&s).max(1e-3);
        for _ in 0..MAX_OUTER {
            self.center(&mut s, t)?;
            let obj = self.objective(&s);
            if m / t <= 0.5 * tol * obj {
                return Ok(obj);
            }
            t *= GROWTH;
        }
        Err(Error::non_convergence(
            "barrier method exhausted its outer iterations",
            m / t,
        ))
    }

    fn center(&self, s: &mut Vec<f64>, t: f64) -> Result<()> {
        for _ in 0..MAX_NEWTON {
            let (grad, hess) = self.derivatives(s, t);
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                // Linear constraints meeting along a face leave almost no curvature
                // in the face direction; a truncated pseudo-inverse step ignores it.
                None => {
                    let svd = hess.svd(true, true);
                    let eps = 1e-14 * svd.singular_values.max();
                    svd.solve(&(-&grad), eps)
                        .map_err(|_| Error::non_convergence("singular barrier Hessian", f64::NAN))?
                }
            };
            let decrement = -grad.dot(&step);
            if !(decrement.is_finite()) {
                return Err(Error::non_convergence("barrier Newton step is not finite", f64::NAN));
            }
            if decrement <= CENTERED {
                return Ok(());
            }
            let mut alpha = if decrement > 0.25 { 1.0 / (1.0 + decrement.sqrt()) } else { 1.0 };
            let trial = |alpha: f64| -> Vec<f64> { s.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect() };
            let mut next = trial(alpha);
            let mut shrinks = 0;
            while !self.feasible(&next) {
                alpha *= 0.5;
                shrinks += 1;
                if shrinks > 60 {
                    return Err(Error::non_convergence("barrier line search lost feasibility", f64::NAN));
                }
                next = trial(alpha);
            }
            // sufficient decrease is only meaningful while the decrement is above roundoff
            if decrement > 1e-8 {
                let f0 = self.value(s, t);
                while self.value(&next, t) > f0 - 0.25 * alpha * decrement && shrinks <= 60 {
                    alpha *= 0.5;
                    shrinks += 1;
                    next = trial(alpha);
                }
            }
            *s = next;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_matches_the_l2_norm_at_full_k() {
        let y = [0.3, -1.2, 2.0];
        let v = solve(&NormSpec::lp(2.0).unwrap(), 3, &y, 1e-10).unwrap();
        let exact = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((v - exact).abs() <= 1e-9 * exact, "{v} vs {exact}");
    }

    #[test]
    fn barrier_handles_zero_components() {
        let y = [0.0, 0.0, 4.0];
        let v = solve(&NormSpec::lp(3.0).unwrap(), 2, &y, 1e-10).unwrap();
        assert!((v - 4.0).abs() <= 1e-8, "{v}");
    }

    #[test]
    fn polyhedral_sources_match_closed_forms() {
        let y = [3.0, -1.0, 2.0];
        let v = solve(&NormSpec::lp(1.0).unwrap(), 2, &y, 1e-10).unwrap();
        assert!((v - 3.0).abs() <= 1e-9 * 3.0, "{v}");
        let v = solve(&NormSpec::lp(1.0).unwrap(), 3, &y, 1e-10).unwrap();
        assert!((v - 3.0).abs() <= 1e-9 * 3.0, "{v}");
        let v = solve(&NormSpec::lp_inf(), 2, &y, 1e-10).unwrap();
        assert!((v - 6.0).abs() <= 1e-9 * 6.0, "{v}");
        let w = Vector::new(vec![1.0, 2.0, 4.0]).unwrap();
        let v = solve(&NormSpec::weighted_lp(f64::INFINITY, w).unwrap(), 1, &y, 1e-10).unwrap();
        assert!((v - 4.0).abs() <= 1e-9 * 4.0, "{v}");
    }
}
