//! Polyhedral norms given by a finite symmetric atom set `A`:
//! `||x|| = min { sum(lambda) : x = sum(lambda_a a), lambda >= 0 }` and
//! `||y||_* = max_a <a, y>`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solvers::{LinearProgram, Relation, Sense};
use crate::vectors::{binomial, dot, IndexSet, Vector};

/// Beyond this many candidate active sets the polar polytope is not enumerated.
const MAX_VERTEX_CANDIDATES: f64 = 250_000.0;

/// Above this many active-set candidates the bidual is solved as an LP
/// rather than recomputing the polar vertices on every call.
const MAX_ENUMERATED_BIDUAL: f64 = 5_000.0;

/// Gauge of `conv(atoms)` at `x`, by simplex.
pub(crate) fn gauge(atoms: &[Vector], x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut lp = LinearProgram::new(Sense::Minimize);
    let lambdas: Vec<usize> = atoms.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (i, &xi) in x.iter().enumerate() {
        let terms = lambdas
            .iter()
            .zip(atoms)
            .filter(|(_, a)| a[i] != 0.0)
            .map(|(&l, a)| (l, a[i]))
            .collect();
        lp.add_row(terms, Relation::Eq, xi);
    }
    let sol = lp
        .solve_simplex()
        .map_err(|_| Error::InvalidSpec("atomic gauge is infeasible: atoms do not span".into()))?;
    Ok(sol.objective.max(0.0))
}

/// Support function of `conv(atoms)`, i.e. the dual norm.
pub(crate) fn support_function(atoms: &[Vector], y: &[f64]) -> f64 {
    atoms.iter().fold(0.0, |m, a| m.max(dot(a.as_slice(), y)))
}

/// `max <x, y>` over the polar polytope `{ y : <a, y> <= 1 }`, i.e. the
/// bidual norm at `x`. The maximum sits at a polar vertex, so small atom sets
/// are handled by enumeration; larger ones fall back to the interior-point LP.
pub(crate) fn polar_support(atoms: &[Vector], x: &[f64], tol: f64) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    if binomial(atoms.len(), atoms[0].dim()) <= MAX_ENUMERATED_BIDUAL {
        let vertices = polar_vertices(atoms)?;
        return Ok(vertices.iter().fold(0.0f64, |m, v| m.max(dot(v.as_slice(), x))));
    }
    let mut lp = LinearProgram::new(Sense::Maximize);
    let ys: Vec<usize> = x
        .iter()
        .map(|&xi| lp.add_var(xi, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for a in atoms {
        let terms = ys.iter().zip(a.iter()).map(|(&y, &ai)| (y, ai)).collect();
        lp.add_row(terms, Relation::Le, 1.0);
    }
    let sol = lp.solve_interior(tol * 1e-2)?;
    let scale = sol.primal_objective.abs().max(1.0);
    if sol.gap() > tol * scale {
        return Err(Error::non_convergence("polar LP gap above tolerance", sol.gap()));
    }
    Ok(0.5 * (sol.primal_objective + sol.dual_objective))
}

/// `sup { <x, y> : x in F_K, gauge(x) <= 1 }`.
pub(crate) fn restricted_dual(atoms: &[Vector], k: &IndexSet, y: &[f64]) -> Result<f64> {
    if y.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut lp = LinearProgram::new(Sense::Maximize);
    let lambdas: Vec<usize> = atoms
        .iter()
        .map(|a| lp.add_var(dot(a.as_slice(), y), (0.0, f64::INFINITY)))
        .collect();
    lp.add_row(lambdas.iter().map(|&l| (l, 1.0)).collect(), Relation::Le, 1.0);
    for i in k.complement().members() {
        let terms = lambdas
            .iter()
            .zip(atoms)
            .filter(|(_, a)| a[*i] != 0.0)
            .map(|(&l, a)| (l, a[*i]))
            .collect();
        lp.add_row(terms, Relation::Eq, 0.0);
    }
    Ok(lp.solve_simplex()?.objective.max(0.0))
}

/// Vertices of the polar polytope `{ v : <a, v> <= 1 for all atoms }`.
///
/// Every vertex is the unique solution of `d` linearly independent active
/// constraints, so all `d`-subsets of atoms are tried.
pub(crate) fn polar_vertices(atoms: &[Vector]) -> Result<Vec<Vector>> {
    let d = atoms[0].dim();
    let m = atoms.len();
    if binomial(m, d) > MAX_VERTEX_CANDIDATES {
        return Err(Error::Unsupported(format!(
            "polar vertex enumeration over C({m},{d}) active sets is too large"
        )));
    }
    let mut vertices: Vec<Vector> = Vec::new();
    let mut combo: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, c| atoms[combo[r]][c]);
        let lu = a.lu();
        if let Some(v) = lu.solve(&DVector::from_element(d, 1.0)) {
            let v: Vec<f64> = v.iter().copied().collect();
            let finite = v.iter().all(|c| c.is_finite());
            let scale = v.iter().fold(1.0f64, |s, c| s.max(c.abs()));
            let residual_ok = combo
                .iter()
                .all(|&j| (dot(atoms[j].as_slice(), &v) - 1.0).abs() <= 1e-9 * scale);
            if finite && residual_ok && atoms.iter().all(|a| dot(a.as_slice(), &v) <= 1.0 + 1e-9) {
                let duplicate = vertices
                    .iter()
                    .any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() <= 1e-9 * scale));
                if !duplicate {
                    vertices.push(Vector::from_finite(v));
                }
            }
        }
        if !next_combination(&mut combo, m) {
            break;
        }
    }
    Ok(vertices)
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A maximizer of `<u, v>` over the dual unit ball: scans the polar vertices,
/// falling back to simplex when the vertex set is too large to enumerate.
pub(crate) fn dual_ball_maximizer(atoms: &[Vector], u: &[f64]) -> Result<Vector> {
    match polar_vertices(atoms) {
        Ok(vertices) => {
            let mut best: Option<(f64, &Vector)> = None;
            for v in &vertices {
                let value = dot(u, v.as_slice());
                if best.is_none_or(|(b, _)| value > b) {
                    best = Some((value, v));
                }
            }
            best.map(|(_, v)| v.clone())
                .ok_or_else(|| Error::InvalidSpec("polar polytope has no vertices".into()))
        }
        Err(Error::Unsupported(_)) => {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let vs: Vec<usize> = u
                .iter()
                .map(|&ui| lp.add_var(ui, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect();
            for a in atoms {
                lp.add_row(vs.iter().zip(a.iter()).map(|(&v, &ai)| (v, ai)).collect(), Relation::Le, 1.0);
            }
            Ok(Vector::from_finite(lp.solve_simplex()?.values))
        }
        Err(e) => Err(e),
    }
}
