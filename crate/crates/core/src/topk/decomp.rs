//! k-support norms as the gauge of the convex hull of the restricted dual
//! balls: `min sum_K ||v_K||_(K,*)` over decompositions `y = sum_K v_K` with
//! `supp(v_K) ⊆ K`. Solved as a conic program by the interior-point backend.
//!
//! For the weighted ℓp family the restricted dual of `v_K` is the dual norm
//! itself and only `|K| = k` is needed. Atomic sources use the exact
//! restricted dual, the projection of the polar polytope onto `F_K`, over all
//! `1 <= |K| <= k`, so no orthant-monotonicity is assumed.

use clarabel::solver::SupportedConeT;

use crate::error::Result;
use crate::norms::{Exponent, NormKind, NormSpec};
use crate::solvers::ConicProgram;
use crate::vectors::{subsets_of_size, subsets_of_size_at_most, Vector};

pub(super) fn solve(source: &NormSpec, k: usize, y: &[f64], tol: f64) -> Result<f64> {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let y: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let d = y.len();
    let program = match source.kind() {
        NormKind::Lp { p } => lp_family(p.conjugate(), &vec![1.0; d], k, &y)?,
        NormKind::WeightedLp { p, w } => lp_family(p.conjugate(), w.as_slice(), k, &y)?,
        NormKind::Atomic { atoms } => atomic(atoms, k, &y)?,
    };
    let sol = program.solve(0.1 * tol)?;
    Ok(scale * 0.5 * (sol.primal_objective + sol.dual_objective))
}

/// Adds `y_i = sum_{K ∋ i} v_{K,i}` as equality rows.
fn coupling(cp: &mut ConicProgram, y: &[f64], pieces: &[(Vec<usize>, Vec<usize>)]) {
    let rows = (0..y.len())
        .map(|i| {
            let terms = pieces
                .iter()
                .filter_map(|(members, vars)| members.iter().position(|&m| m == i).map(|pos| (vars[pos], 1.0)))
                .collect();
            (terms, y[i])
        })
        .collect::<Vec<_>>();
    cp.add_block(SupportedConeT::ZeroConeT(rows.len()), rows);
}

/// Cost `||v / w||_q <= t` for each piece, dual of the weighted ℓp source.
fn lp_family(q: Exponent, w: &[f64], k: usize, y: &[f64]) -> Result<ConicProgram> {
    let d = y.len();
    let mut cp = ConicProgram::new(0);
    let mut pieces = Vec::new();
    for set in subsets_of_size(d, k)? {
        let members = set.members().to_vec();
        let t = cp.add_var(1.0);
        let v: Vec<usize> = members.iter().map(|_| cp.add_var(0.0)).collect();
        let scaled = |j: usize| -> (usize, f64) { (v[j], -1.0 / w[members[j]]) };
        match q {
            Exponent::Infinity => {
                let mut rows = Vec::new();
                for j in 0..members.len() {
                    let (var, c) = scaled(j);
                    rows.push((vec![(t, -1.0), (var, c)], 0.0));
                    rows.push((vec![(t, -1.0), (var, -c)], 0.0));
                }
                cp.add_block(SupportedConeT::NonnegativeConeT(rows.len()), rows);
            }
            Exponent::Finite(1.0) => {
                let a: Vec<usize> = members.iter().map(|_| cp.add_var(0.0)).collect();
                let mut rows = Vec::new();
                for (j, &aj) in a.iter().enumerate() {
                    let (var, c) = scaled(j);
                    rows.push((vec![(aj, -1.0), (var, c)], 0.0));
                    rows.push((vec![(aj, -1.0), (var, -c)], 0.0));
                }
                let mut total: Vec<(usize, f64)> = a.iter().map(|&ai| (ai, 1.0)).collect();
                total.push((t, -1.0));
                rows.push((total, 0.0));
                cp.add_block(SupportedConeT::NonnegativeConeT(rows.len()), rows);
            }
            Exponent::Finite(2.0) => {
                let mut rows = vec![(vec![(t, -1.0)], 0.0)];
                rows.extend((0..members.len()).map(|j| (vec![scaled(j)], 0.0)));
                cp.add_block(SupportedConeT::SecondOrderConeT(rows.len()), rows);
            }
            Exponent::Finite(q) => {
                // |z_j|^q <= r_j t^(q-1) and sum r_j = t give ||z||_q <= t
                let r: Vec<usize> = members.iter().map(|_| cp.add_var(0.0)).collect();
                for (j, &rj) in r.iter().enumerate() {
                    let rows = vec![(vec![(rj, -1.0)], 0.0), (vec![(t, -1.0)], 0.0), (vec![scaled(j)], 0.0)];
                    cp.add_block(SupportedConeT::PowerConeT(1.0 / q), rows);
                }
                let mut total: Vec<(usize, f64)> = r.iter().map(|&rj| (rj, 1.0)).collect();
                total.push((t, -1.0));
                cp.add_block(SupportedConeT::ZeroConeT(1), vec![(total, 0.0)]);
            }
        }
        pieces.push((members, v));
    }
    coupling(&mut cp, y, &pieces);
    Ok(cp)
}

/// Restricted dual of the atomic norm on `F_K`: `v = P_K z` with
/// `<a, z> <= t` for every atom.
fn atomic(atoms: &[Vector], k: usize, y: &[f64]) -> Result<ConicProgram> {
    let d = y.len();
    let mut cp = ConicProgram::new(0);
    let mut pieces = Vec::new();
    for set in subsets_of_size_at_most(d, k)?.filter(|s| !s.is_empty()) {
        let t = cp.add_var(1.0);
        let z: Vec<usize> = (0..d).map(|_| cp.add_var(0.0)).collect();
        let rows = atoms
            .iter()
            .map(|a| {
                let mut terms: Vec<(usize, f64)> =
                    a.iter().enumerate().filter(|(_, &ai)| ai != 0.0).map(|(i, &ai)| (z[i], ai)).collect();
                terms.push((t, -1.0));
                (terms, 0.0)
            })
            .collect::<Vec<_>>();
        cp.add_block(SupportedConeT::NonnegativeConeT(rows.len()), rows);
        let members = set.members().to_vec();
        let vars = members.iter().map(|&i| z[i]).collect();
        pieces.push((members, vars));
    }
    coupling(&mut cp, y, &pieces);
    Ok(cp)
}
