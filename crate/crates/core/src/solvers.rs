//! Thin builders over the two external optimizers: a dense simplex (minilp)
//! for exact vertex solutions of small LPs, and an interior-point conic solver
//! (Clarabel) for second-order and power-cone programs.
//!
//! Each call builds a fresh solver instance, so no solver state is shared
//! between concurrent evaluations.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// A small linear program with bounded variables.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            bounds: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, objective: f64, bounds: (f64, f64)) -> usize {
        self.objective.push(objective);
        self.bounds.push(bounds);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { terms, relation, rhs });
    }

    /// Solves with the simplex method; solutions are basic (vertex) solutions.
    pub fn solve_simplex(&self) -> Result<LpSolution> {
        let direction = match self.sense {
            Sense::Minimize => minilp::OptimizationDirection::Minimize,
            Sense::Maximize => minilp::OptimizationDirection::Maximize,
        };
        let mut problem = minilp::Problem::new(direction);
        let vars: Vec<minilp::Variable> = self
            .objective
            .iter()
            .zip(&self.bounds)
            .map(|(&c, &b)| problem.add_var(c, b))
            .collect();
        for row in &self.rows {
            let mut expr = minilp::LinearExpr::empty();
            for &(j, c) in &row.terms {
                expr.add(vars[j], c);
            }
            let op = match row.relation {
                Relation::Le => minilp::ComparisonOp::Le,
                Relation::Eq => minilp::ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, row.rhs);
        }
        match problem.solve() {
            Ok(solution) => Ok(LpSolution {
                objective: solution.objective(),
                values: vars.iter().map(|&v| solution[v]).collect(),
            }),
            Err(minilp::Error::Infeasible) => Err(Error::InvalidSpec("linear program is infeasible".into())),
            Err(minilp::Error::Unbounded) => Err(Error::InvalidSpec("linear program is unbounded".into())),
        }
    }

    /// Solves with the interior-point conic solver at the requested accuracy.
    pub fn solve_interior(&self, tol: f64) -> Result<ConicSolution> {
        let n = self.objective.len();
        let mut conic = ConicProgram::new(n);
        let sign = if self.sense == Sense::Maximize { -1.0 } else { 1.0 };
        for (j, &c) in self.objective.iter().enumerate() {
            conic.objective[j] = sign * c;
        }
        let mut equalities = Vec::new();
        let mut inequalities = Vec::new();
        for row in &self.rows {
            match row.relation {
                Relation::Eq => equalities.push((row.terms.clone(), row.rhs)),
                Relation::Le => inequalities.push((row.terms.clone(), row.rhs)),
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_finite() {
                inequalities.push((vec![(j, -1.0)], -lo));
            }
            if hi.is_finite() {
                inequalities.push((vec![(j, 1.0)], hi));
            }
        }
        if !equalities.is_empty() {
            conic.add_block(SupportedConeT::ZeroConeT(equalities.len()), equalities);
        }
        if !inequalities.is_empty() {
            conic.add_block(SupportedConeT::NonnegativeConeT(inequalities.len()), inequalities);
        }
        let mut solution = conic.solve(tol)?;
        solution.primal_objective *= sign;
        solution.dual_objective *= sign;
        Ok(solution)
    }
}

/// Rows `(a, b)` of one cone block, each contributing the slack `b - a'x`.
type ConeRows = Vec<(Vec<(usize, f64)>, f64)>;

/// `min q'x  s.t.  b - A x in K` for a product cone `K`.
#[derive(Debug, Clone)]
pub(crate) struct ConicProgram {
    pub objective: Vec<f64>,
    blocks: Vec<(SupportedConeT<f64>, ConeRows)>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConicSolution {
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl ConicSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        ConicProgram {
            objective: vec![0.0; num_vars],
            blocks: Vec::new(),
        }
    }

    pub fn add_var(&mut self, objective: f64) -> usize {
        self.objective.push(objective);
        self.objective.len() - 1
    }

    /// Appends one cone block. Each row `(a, b)` contributes the slack
    /// component `b - a'x`.
    pub fn add_block(&mut self, cone: SupportedConeT<f64>, rows: ConeRows) {
        self.blocks.push((cone, rows));
    }

    pub fn solve(&self, tol: f64) -> Result<ConicSolution> {
        let n = self.objective.len();
        let mut rows_i = Vec::new();
        let mut cols_j = Vec::new();
        let mut vals = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::with_capacity(self.blocks.len());
        for (cone, rows) in &self.blocks {
            for (terms, rhs) in rows {
                let r = b.len();
                for &(j, c) in terms {
                    rows_i.push(r);
                    cols_j.push(j);
                    vals.push(c);
                }
                b.push(*rhs);
            }
            cones.push(cone.clone());
        }
        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, n, rows_i, cols_j, vals);
        let p = CscMatrix::zeros((n, n));
        let tol = tol.clamp(1e-12, 1e-4);
        let settings = DefaultSettings {
            verbose: false,
            max_iter: 400,
            tol_gap_abs: tol,
            tol_gap_rel: tol,
            tol_feas: tol,
            tol_ktratio: tol.max(1e-10),
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &self.objective, &a, &b, &cones, settings)
            .map_err(|e| Error::InvalidArgument(format!("conic program rejected: {e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let out = ConicSolution {
            primal_objective: sol.obj_val,
            dual_objective: sol.obj_val_dual,
        };
        match sol.status {
            SolverStatus::Solved => Ok(out),
            // reduced accuracy is accepted when the reported gap still meets the request
            SolverStatus::AlmostSolved
                if out.gap() <= 10.0 * tol * (1.0 + out.primal_objective.abs()) =>
            {
                Ok(out)
            }
            status => Err(Error::non_convergence(
                format!("conic solver stopped with status {status:?}"),
                out.gap(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_and_interior_agree_on_a_small_lp() {
        // max x + 2y  s.t. x + y <= 4, x <= 3, y <= 2.5, x,y >= 0  -> 6.5 at (1.5, 2.5)
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(1.0, (0.0, f64::INFINITY));
        let y = lp.add_var(2.0, (0.0, 2.5));
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
        lp.add_row(vec![(x, 1.0)], Relation::Le, 3.0);
        let exact = lp.solve_simplex().unwrap();
        assert!((exact.objective - 6.5).abs() < 1e-12);
        assert!((exact.values[x] - 1.5).abs() < 1e-12);
        let ip = lp.solve_interior(1e-10).unwrap();
        assert!((ip.primal_objective - 6.5).abs() < 1e-7);
    }

    #[test]
    fn infeasible_lp_is_reported() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(1.0, (0.0, 1.0));
        lp.add_row(vec![(x, 1.0)], Relation::Eq, 2.0);
        assert!(lp.solve_simplex().is_err());
    }

    #[test]
    fn second_order_cone_projection_value() {
        // min t  s.t. ||(3, 4)|| <= t  -> 5
        let mut cp = ConicProgram::new(0);
        let t = cp.add_var(1.0);
        let rows = vec![(vec![(t, -1.0)], 0.0), (vec![], 3.0), (vec![], 4.0)];
        cp.add_block(SupportedConeT::SecondOrderConeT(3), rows);
        let sol = cp.solve(1e-10).unwrap();
        assert!((sol.primal_objective - 5.0).abs() < 1e-7);
    }
}
