//! Best-bound branch-and-bound with a lazy cone-cut loop at every node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use log::debug;

use super::cone::{cone_cut, Cut};
use super::lp::{LpBuilder, LpNode, LpOutcome};
use super::problem::{LinExpr, MipProblem, Sense};
use super::{SolveOptions, SolveStats, SolveStatus, Solution, SolverError};

/// Absolute slack on pruning so that exact ties do not reopen the tree.
const PRUNE_EPS: f64 = 1e-9;
/// An integer-feasible node may keep cutting past the per-node cap, up to
/// this multiple of it.
const HARD_CUT_FACTOR: usize = 20;
/// Without an incumbent, dive from the current node every this many nodes.
const DIVE_PERIOD: usize = 50;

/// Branching row on the path from the root, linked towards the root.
struct Branch {
    var: usize,
    sense: Sense,
    rhs: f64,
    parent: Option<Rc<Branch>>,
}

type Path = Option<Rc<Branch>>;

struct Node {
    lp: LpNode,
    path: Path,
    values: Vec<f64>,
    bound: f64,
    depth: usize,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap pops the maximum: reverse so the lowest bound, then the
    // oldest node, comes first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Copy)]
enum Budget {
    Time,
    Nodes,
}

#[derive(Clone, Copy)]
enum Rounding {
    Nearest,
    Up,
}

struct Search<'a> {
    p: &'a MipProblem,
    opts: &'a SolveOptions,
    start: Instant,
    vars: Vec<microlp::Variable>,
    root_bounds: Vec<(f64, f64)>,
    ints: Vec<usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    stats: SolveStats,
    seq: usize,
}

/// Solves `p` to the requested gap. Deterministic: the same problem and
/// options always give the same solution.
pub fn solve(p: &MipProblem, opts: &SolveOptions) -> Result<Solution, SolverError> {
    p.validate()?;
    let start = Instant::now();
    let finish = |status, values: Vec<f64>, bound: f64, mut stats: SolveStats| {
        stats.wall_time = start.elapsed();
        let objective = if values.is_empty() && !p.vars.is_empty() {
            f64::NAN
        } else {
            p.objective_value(&values)
        };
        let mip_gap = if !values.is_empty() || (status == SolveStatus::Optimal && p.vars.is_empty()) {
            relative_gap(objective, bound)
        } else {
            f64::INFINITY
        };
        Solution {
            status,
            objective,
            values,
            mip_gap,
            best_bound: bound,
            stats,
        }
    };

    // rounded integer bounds
    let mut bounds = Vec::with_capacity(p.vars.len());
    for v in &p.vars {
        let (lo, hi) = if v.integer {
            (v.lo.ceil(), v.hi.floor())
        } else {
            (v.lo, v.hi)
        };
        if lo > hi {
            return Ok(finish(SolveStatus::Infeasible, Vec::new(), f64::INFINITY, SolveStats::default()));
        }
        bounds.push((lo, hi));
    }
    for r in p.rows.iter().filter(|r| r.expr.terms.is_empty()) {
        let ok = match r.sense {
            Sense::Le => 0.0 <= r.rhs + PRUNE_EPS,
            Sense::Ge => 0.0 >= r.rhs - PRUNE_EPS,
            Sense::Eq => r.rhs.abs() <= PRUNE_EPS,
        };
        if !ok {
            return Ok(finish(SolveStatus::Infeasible, Vec::new(), f64::INFINITY, SolveStats::default()));
        }
    }
    let constant_cone_violated = p.cones.iter().any(|c| {
        c.x.terms.is_empty()
            && c.y.terms.is_empty()
            && c.z.terms.is_empty()
            && c.residual(&[]) > opts.feas_tol * c.magnitude(&[])
    });
    if constant_cone_violated {
        return Ok(finish(SolveStatus::Infeasible, Vec::new(), f64::INFINITY, SolveStats::default()));
    }
    if p.vars.is_empty() {
        let obj = p.objective.constant;
        return Ok(finish(SolveStatus::Optimal, Vec::new(), obj, SolveStats::default()));
    }

    let (root, vars) = LpBuilder::new(p, &bounds).solve()?;
    let mut search = Search {
        p,
        opts,
        start,
        vars,
        root_bounds: bounds,
        ints: (0..p.vars.len()).filter(|&j| p.vars[j].integer).collect(),
        incumbent: None,
        stats: SolveStats {
            lp_solves: 1,
            ..SolveStats::default()
        },
        seq: 0,
    };
    let root = match root {
        LpOutcome::Optimal(n) => n,
        LpOutcome::Infeasible => {
            return Ok(finish(SolveStatus::Infeasible, Vec::new(), f64::INFINITY, search.stats));
        }
        LpOutcome::Unbounded => {
            return Ok(finish(SolveStatus::Unbounded, Vec::new(), f64::NEG_INFINITY, search.stats));
        }
    };

    let mut heap = BinaryHeap::new();
    if let Some(node) = search.evaluate(root, 0, None)? {
        search.dive(node.lp.clone(), node.values.clone(), Rounding::Up)?;
        if !search.prunable(node.bound) {
            search.dive(node.lp.clone(), node.values.clone(), Rounding::Nearest)?;
        }
        heap.push(node);
    }

    let mut limited = None;
    let mut closed_bound = f64::INFINITY;
    while let Some(node) = heap.pop() {
        if search.prunable(node.bound) {
            // every remaining node has a bound at least this large
            closed_bound = node.bound;
            heap.clear();
            break;
        }
        if let Some(b) = search.out_of_budget() {
            heap.push(node);
            limited = Some(b);
            break;
        }
        search.stats.nodes += 1;
        if search.opts.verbose {
            debug!(
                "node {} depth {} bound {:.6} incumbent {} cuts {}",
                search.stats.nodes,
                node.depth,
                node.bound,
                search
                    .incumbent
                    .as_ref()
                    .map_or("none".to_string(), |(o, _)| format!("{o:.6}")),
                search.stats.cuts
            );
        }
        if search.incumbent.is_none() && search.stats.nodes.is_multiple_of(DIVE_PERIOD) {
            search.dive(node.lp.clone(), node.values.clone(), Rounding::Nearest)?;
        }
        let Some(j) = search.most_fractional(&node.values) else {
            // only reachable when cut loop left an integral node open
            continue;
        };
        let v = node.values[j];
        let down = node.lp.clone();
        let up = node.lp;
        for (lp, sense, rhs) in [(down, Sense::Le, v.floor()), (up, Sense::Ge, v.ceil())] {
            search.stats.lp_solves += 1;
            let path = Some(Rc::new(Branch {
                var: j,
                sense,
                rhs,
                parent: node.path.clone(),
            }));
            let row = LinExpr::term(super::Var(j), 1.0);
            let outcome = match lp.add_row(&search.vars, &row, sense, rhs) {
                Ok(o) => o,
                Err(e) => search.rebuild(&path, &[], e)?,
            };
            match outcome {
                LpOutcome::Optimal(child) => {
                    if let Some(n) = search.evaluate(child, node.depth + 1, path)? {
                        heap.push(n);
                    }
                }
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => {
                    return Err(SolverError::Numerical("unbounded child relaxation".into()));
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(closed_bound, f64::min);
    let stats = std::mem::take(&mut search.stats);
    Ok(match search.incumbent.take() {
        Some((obj, values)) => {
            let bound = open_bound.min(obj);
            let status = match limited {
                _ if relative_gap(obj, bound) <= opts.gap_tol => SolveStatus::Optimal,
                None => SolveStatus::Optimal,
                Some(Budget::Nodes) => SolveStatus::FeasibleGap,
                Some(Budget::Time) => SolveStatus::Limit,
            };
            finish(status, values, bound, stats)
        }
        None if limited.is_some() => finish(SolveStatus::Limit, Vec::new(), open_bound, stats),
        None => finish(SolveStatus::Infeasible, Vec::new(), f64::INFINITY, stats),
    })
}

fn relative_gap(obj: f64, bound: f64) -> f64 {
    let diff = (obj - bound).max(0.0);
    if diff <= PRUNE_EPS * obj.abs().max(1.0) {
        0.0
    } else {
        diff / obj.abs().max(1e-10)
    }
}

impl Search<'_> {
    fn out_of_budget(&self) -> Option<Budget> {
        if self.opts.time_limit.is_some_and(|t| self.start.elapsed() >= t) {
            Some(Budget::Time)
        } else if self.opts.node_limit.is_some_and(|n| self.stats.nodes >= n) {
            Some(Budget::Nodes)
        } else {
            None
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some((u, _)) => {
                let tol = (self.opts.gap_tol * u.abs()).max(PRUNE_EPS * u.abs().max(1.0));
                bound >= u - tol
            }
        }
    }

    fn fractionality(&self, v: f64) -> f64 {
        let f = (v - v.round()).abs();
        if f <= self.opts.feas_tol {
            0.0
        } else {
            f
        }
    }

    /// Integer variable with fractional part closest to one half; lowest
    /// index on ties.
    fn most_fractional(&self, values: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.ints {
            let f = self.fractionality(values[j]);
            if f > 0.0 && best.is_none_or(|(_, b)| f > b) {
                best = Some((j, f));
            }
        }
        best.map(|(j, _)| j)
    }

    fn least_fractional(&self, values: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.ints {
            let f = self.fractionality(values[j]);
            if f > 0.0 && best.is_none_or(|(_, b)| f < b) {
                best = Some((j, f));
            }
        }
        best.map(|(j, _)| j)
    }

    fn violated_cones(&self, values: &[f64]) -> Vec<usize> {
        self.p
            .cones
            .iter()
            .enumerate()
            .filter(|(_, c)| c.residual(values) > self.opts.feas_tol * c.magnitude(values))
            .map(|(k, _)| k)
            .collect()
    }

    /// Adds cone cuts until no cone is violated. Returns `None` when the
    /// node becomes infeasible or cannot beat the incumbent.
    /// `path` is `None` inside dives, whose fixings are not tracked; a
    /// failed warm re-solve is then returned as an error.
    fn cut_loop(&mut self, mut lp: LpNode, path: Option<&Path>) -> Result<Option<(LpNode, Vec<f64>)>, SolverError> {
        let cap = self.opts.max_cuts_per_node;
        let mut added = 0;
        loop {
            let values = lp.values(&self.vars);
            let violated = self.violated_cones(&values);
            if violated.is_empty() {
                return Ok(Some((lp, values)));
            }
            if self.prunable(lp.objective() + self.p.objective.constant) {
                return Ok(None);
            }
            if added >= cap {
                if self.most_fractional(&values).is_some() {
                    return Ok(Some((lp, values)));
                }
                if added >= cap.max(1) * HARD_CUT_FACTOR {
                    return Err(SolverError::Numerical(format!(
                        "cone cuts stalled after {added} cuts at an integral node"
                    )));
                }
            }
            let cuts: Vec<Cut> = violated
                .into_iter()
                .map(|k| cone_cut(k, &self.p.cones[k], &values))
                .collect();
            self.stats.cuts += cuts.len();
            self.stats.lp_solves += 1;
            added += cuts.len();
            let rows: Vec<(&LinExpr, f64)> = cuts.iter().map(|c| (&c.expr, c.rhs)).collect();
            let outcome = match lp.add_le_rows(&self.vars, &rows) {
                Ok(o) => o,
                Err(e) => match path {
                    Some(path) => self.rebuild(path, &cuts, e)?,
                    None => return Err(e),
                },
            };
            self.stats.cut_log.extend(cuts);
            lp = match outcome {
                LpOutcome::Optimal(n) => n,
                LpOutcome::Infeasible => return Ok(None),
                LpOutcome::Unbounded => {
                    return Err(SolverError::Numerical("cut made relaxation unbounded".into()))
                }
            };
        }
    }

    /// Cut loop, then either records an integral incumbent or returns the
    /// node for branching.
    fn evaluate(&mut self, lp: LpNode, depth: usize, path: Path) -> Result<Option<Node>, SolverError> {
        let Some((lp, values)) = self.cut_loop(lp, Some(&path))? else {
            return Ok(None);
        };
        let bound = lp.objective() + self.p.objective.constant;
        if self.prunable(bound) {
            return Ok(None);
        }
        if self.most_fractional(&values).is_none() && self.violated_cones(&values).is_empty() {
            self.offer(values);
            return Ok(None);
        }
        self.seq += 1;
        Ok(Some(Node {
            lp,
            path,
            values,
            bound,
            depth,
            seq: self.seq,
        }))
    }

    /// Cold re-solve of a node after the warm re-solve failed: root bounds
    /// tightened along `path`, every cut found so far, and `extra`.
    fn rebuild(&mut self, path: &Path, extra: &[Cut], cause: SolverError) -> Result<LpOutcome, SolverError> {
        debug!("warm re-solve failed ({cause}), rebuilding the node");
        let mut bounds = self.root_bounds.clone();
        let mut cur = path.as_deref();
        while let Some(b) = cur {
            let (lo, hi) = &mut bounds[b.var];
            match b.sense {
                Sense::Le => *hi = hi.min(b.rhs),
                Sense::Ge => *lo = lo.max(b.rhs),
                Sense::Eq => {
                    *lo = lo.max(b.rhs);
                    *hi = hi.min(b.rhs);
                }
            }
            cur = b.parent.as_deref();
        }
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            return Ok(LpOutcome::Infeasible);
        }
        let mut lp = LpBuilder::new(self.p, &bounds);
        for c in self.stats.cut_log.iter().chain(extra) {
            lp.add_row(&c.expr, Sense::Le, c.rhs);
        }
        self.stats.lp_solves += 1;
        lp.solve().map(|(o, _)| o)
    }

    fn offer(&mut self, mut values: Vec<f64>) {
        for &j in &self.ints {
            values[j] = values[j].round();
        }
        for (x, v) in values.iter_mut().zip(&self.p.vars) {
            *x = x.clamp(v.lo, v.hi);
        }
        let obj = self.p.objective_value(&values);
        let better = match &self.incumbent {
            None => true,
            Some((u, _)) => obj < *u,
        };
        if better {
            self.stats.incumbent_trace.push(obj);
            self.incumbent = Some((obj, values));
        }
    }

    /// Rounding dive: repeatedly fixes the least fractional integer to its
    /// nearest value (the other side if that is infeasible).
    fn dive(&mut self, mut lp: LpNode, mut values: Vec<f64>, rule: Rounding) -> Result<(), SolverError> {
        for _ in 0..=2 * self.ints.len() {
            if self.opts.time_limit.is_some_and(|t| self.start.elapsed() >= t) {
                return Ok(());
            }
            let Some(j) = self.least_fractional(&values) else {
                if self.violated_cones(&values).is_empty() {
                    self.offer(values);
                }
                return Ok(());
            };
            let v = values[j];
            let near = match rule {
                Rounding::Nearest => v.round(),
                Rounding::Up => v.ceil(),
            };
            let far = if near > v { v.floor() } else { v.ceil() };
            let mut next = None;
            for target in [near, far] {
                self.stats.lp_solves += 1;
                // a numerical failure only ends the dive
                match lp.clone().fix(self.vars[j], target) {
                    Ok(LpOutcome::Optimal(n)) => {
                        next = Some(n);
                        break;
                    }
                    Ok(LpOutcome::Infeasible) => continue,
                    Ok(LpOutcome::Unbounded) | Err(_) => return Ok(()),
                }
            }
            let Some(n) = next else { return Ok(()) };
            let vals = n.values(&self.vars);
            if self.prunable(n.objective() + self.p.objective.constant) {
                return Ok(());
            }
            // cones are only re-separated once the rounding is complete
            if self.most_fractional(&vals).is_some() {
                lp = n;
                values = vals;
                continue;
            }
            match self.cut_loop(n, None) {
                Ok(Some((n, vals))) => {
                    lp = n;
                    values = vals;
                }
                Ok(None) | Err(_) => return Ok(()),
            }
        }
        Ok(())
    }
}
