//! Mixed-integer solver for problems with linear rows and rotated-cone rows.
//!
//! Branch-and-bound runs over LP relaxations solved by `microlp`. Cone rows
//! `x·y ≥ z²` are enforced lazily with supporting-hyperplane cuts.

mod bnb;
mod cone;
mod lp;
mod mps;
mod problem;

use std::time::Duration;

pub use bnb::solve;
pub use cone::{cone_cut, Cut};
pub use mps::{export_interchange, Interchange};
pub use problem::{ConeRow, LinExpr, LinearRow, MipProblem, Sense, Var, VarDef};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative optimality gap at which the search stops.
    pub gap_tol: f64,
    /// Tolerance for integrality and for cone rows (relative to magnitude).
    pub feas_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Cut rounds at a node before branching on a fractional variable.
    pub max_cuts_per_node: usize,
    /// Emit one log line per node at `debug` level.
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-3,
            feas_tol: 1e-7,
            time_limit: None,
            node_limit: None,
            max_cuts_per_node: 200,
            verbose: false,
        }
    }
}

impl SolveOptions {
    pub fn exact() -> Self {
        SolveOptions {
            gap_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// The node limit stopped the search with an incumbent outside the gap.
    FeasibleGap,
    Infeasible,
    Unbounded,
    /// The time limit stopped the search, or the node limit did before any
    /// incumbent was found. `values` holds the incumbent if there is one.
    Limit,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub cuts: usize,
    pub lp_solves: usize,
    pub wall_time: Duration,
    /// Incumbent objective each time it improved, in order.
    pub incumbent_trace: Vec<f64>,
    /// Every cut added during the solve.
    pub cut_log: Vec<Cut>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub mip_gap: f64,
    pub best_bound: f64,
    pub stats: SolveStats,
}

impl Solution {
    /// True when `values` holds a feasible point.
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty() || (self.status == SolveStatus::Optimal && self.objective.is_finite())
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(&self.values)
    }
}
