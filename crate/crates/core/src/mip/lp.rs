//! Thin adapter over the `microlp` bounded dual simplex.
//!
//! All variables are handed to the LP engine as continuous; integrality and
//! cones are the branch-and-bound layer's business. Rows added after the
//! first solve (branching bounds, cone cuts) are re-optimized from the
//! previous basis.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::problem::{LinExpr, MipProblem, Sense};
use super::SolverError;

pub(crate) enum LpOutcome {
    Optimal(LpNode),
    Infeasible,
    Unbounded,
}

#[derive(Clone)]
pub(crate) struct LpNode {
    sol: microlp::Solution,
}

fn op(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Ge => ComparisonOp::Ge,
        Sense::Eq => ComparisonOp::Eq,
    }
}

fn map_err(e: microlp::Error) -> Result<LpOutcome, SolverError> {
    match e {
        microlp::Error::Infeasible => Ok(LpOutcome::Infeasible),
        microlp::Error::Unbounded => Ok(LpOutcome::Unbounded),
        other => Err(SolverError::Numerical(other.to_string())),
    }
}

fn terms(vars: &[Variable], expr: &LinExpr) -> Vec<(Variable, f64)> {
    expr.terms.iter().map(|&(v, c)| (vars[v.0], c)).collect()
}

/// An LP relaxation under construction.
pub(crate) struct LpBuilder {
    problem: Problem,
    vars: Vec<Variable>,
}

impl LpBuilder {
    /// Relaxation of `p` with per-variable bounds overridden by `bounds`.
    pub(crate) fn new(p: &MipProblem, bounds: &[(f64, f64)]) -> Self {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let mut obj = vec![0.0; p.vars.len()];
        for &(v, c) in &p.objective.terms {
            obj[v.0] += c;
        }
        let vars = bounds
            .iter()
            .zip(&obj)
            .map(|(&(lo, hi), &c)| problem.add_var(c, (lo, hi)))
            .collect::<Vec<_>>();
        for r in &p.rows {
            if r.expr.terms.is_empty() {
                continue;
            }
            problem.add_constraint(terms(&vars, &r.expr), op(r.sense), r.rhs);
        }
        LpBuilder { problem, vars }
    }

    pub(crate) fn add_row(&mut self, expr: &LinExpr, sense: Sense, rhs: f64) {
        if !expr.terms.is_empty() {
            self.problem.add_constraint(terms(&self.vars, expr), op(sense), rhs);
        }
    }

    pub(crate) fn solve(self) -> Result<(LpOutcome, Vec<Variable>), SolverError> {
        let outcome = match self.problem.solve() {
            Ok(out) => match out.into_solution() {
                Ok(sol) => LpOutcome::Optimal(LpNode { sol }),
                Err(_) => return Err(SolverError::Numerical("LP solve interrupted".into())),
            },
            Err(e) => map_err(e)?,
        };
        Ok((outcome, self.vars))
    }
}

impl LpNode {
    /// Objective without the problem's constant term.
    pub(crate) fn objective(&self) -> f64 {
        self.sol.objective()
    }

    pub(crate) fn values(&self, vars: &[Variable]) -> Vec<f64> {
        vars.iter().map(|&v| self.sol.var_value_raw(v)).collect()
    }

    pub(crate) fn add_row(
        self,
        vars: &[Variable],
        expr: &LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<LpOutcome, SolverError> {
        if expr.terms.is_empty() {
            let ok = match sense {
                Sense::Le => 0.0 <= rhs,
                Sense::Ge => 0.0 >= rhs,
                Sense::Eq => rhs == 0.0,
            };
            return Ok(if ok { LpOutcome::Optimal(self) } else { LpOutcome::Infeasible });
        }
        match self.sol.add_constraint(terms(vars, expr), op(sense), rhs) {
            Ok(out) => match out.into_solution() {
                Ok(sol) => Ok(LpOutcome::Optimal(LpNode { sol })),
                Err(_) => Err(SolverError::Numerical("LP re-solve interrupted".into())),
            },
            Err(e) => map_err(e),
        }
    }

    /// Adds `expr <= rhs` rows in one batch and re-optimizes once.
    pub(crate) fn add_le_rows(self, vars: &[Variable], rows: &[(&LinExpr, f64)]) -> Result<LpOutcome, SolverError> {
        let mut batch = Vec::with_capacity(rows.len());
        for &(expr, rhs) in rows {
            if expr.terms.is_empty() {
                if rhs < 0.0 {
                    return Ok(LpOutcome::Infeasible);
                }
                continue;
            }
            batch.push((terms(vars, expr), ComparisonOp::Le, rhs));
        }
        if batch.is_empty() {
            return Ok(LpOutcome::Optimal(self));
        }
        match self.sol.add_constraints(batch) {
            Ok(out) => match out.into_solution() {
                Ok(sol) => Ok(LpOutcome::Optimal(LpNode { sol })),
                Err(_) => Err(SolverError::Numerical("LP re-solve interrupted".into())),
            },
            Err(e) => map_err(e),
        }
    }

    pub(crate) fn fix(self, var: Variable, value: f64) -> Result<LpOutcome, SolverError> {
        match self.sol.fix_var(var, value) {
            Ok(out) => match out.into_solution() {
                Ok(sol) => Ok(LpOutcome::Optimal(LpNode { sol })),
                Err(_) => Err(SolverError::Numerical("LP re-solve interrupted".into())),
            },
            Err(e) => map_err(e),
        }
    }
}
