use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{decision_cost, system_inertia, CostBreakdown, NodeDecision, PlanState, RootPlan};
use crate::system::SystemModel;

use super::{build_tree, ErrorModel, RootState, ScenarioTree, TreeConfig};

/// Realized demand and wind, indexed by absolute hour.
#[derive(Debug, Clone, PartialEq)]
pub struct ActualTrace {
    pub demand: Vec<f64>,
    pub wind_mw: Vec<f64>,
    pub wind_capacity: f64,
}

impl ActualTrace {
    pub fn from_model(model: &SystemModel) -> Self {
        ActualTrace {
            demand: model.demand_series.clone(),
            wind_mw: (0..model.hours()).map(|h| model.wind_power(h)).collect(),
            wind_capacity: model.wind_capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommittedHour {
    pub hour: usize,
    pub decision: NodeDecision,
    pub cost: CostBreakdown,
    /// MW·s after losing the largest infeed.
    pub inertia: f64,
    pub pfr: f64,
    pub efr: f64,
    pub wind_available: f64,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub initial_state: PlanState,
    /// Start-up queue chosen by the first solve.
    pub initial_pending: Vec<Vec<u32>>,
    pub hours: Vec<CommittedHour>,
    pub final_state: PlanState,
}

impl Schedule {
    pub fn total_cost(&self) -> CostBreakdown {
        let mut c = CostBreakdown::default();
        for h in &self.hours {
            c.add(&h.cost);
        }
        c
    }
}

/// Receding-horizon loop: at every hour a tree is grown from the realized
/// wind, `planner` solves it, and only the root decision is kept.
#[allow(clippy::too_many_arguments)]
pub fn rolling_plan<F>(
    model: &SystemModel,
    mut planner: F,
    start_hour: usize,
    n_steps: usize,
    actual: &ActualTrace,
    tree_cfg: &TreeConfig,
    error_model: &ErrorModel,
    initial: PlanState,
) -> Result<Schedule>
where
    F: FnMut(&ScenarioTree, &PlanState) -> Result<RootPlan>,
{
    let horizon = tree_cfg.horizon;
    let needed = start_hour + n_steps + horizon;
    if actual.wind_mw.len() != actual.demand.len() || actual.len() < needed {
        return Err(Error::Precondition(format!(
            "actual trace covers {} hours, rolling plan needs {needed}",
            actual.len()
        )));
    }
    let mut state = initial.clone();
    let mut hours = Vec::with_capacity(n_steps);
    let mut initial_pending = None;
    for t in start_hour..start_hour + n_steps {
        let window = t..=t + horizon;
        let root = RootState {
            hour: t,
            wind_mw: actual.wind_mw[t],
            wind_capacity: actual.wind_capacity,
            demand: actual.demand[window.clone()].to_vec(),
            wind_median: tree_cfg.perfect_median.then(|| actual.wind_mw[window].to_vec()),
        };
        let tree = build_tree(
            &root,
            &tree_cfg.quantiles,
            &tree_cfg.weights,
            horizon,
            &tree_cfg.branch_stages,
            error_model,
        )?;
        let plan = planner(&tree, &state).map_err(|e| Error::Planner {
            hour: t,
            source: Box::new(e),
        })?;
        let d = &plan.decision;
        hours.push(CommittedHour {
            hour: t,
            cost: decision_cost(model, d, 1.0),
            inertia: system_inertia(&d.n_up(), &model.thermal_classes, model.loss_class_index()),
            pfr: d.total_pfr(),
            efr: d.total_efr(),
            wind_available: tree.root().wind_available,
            demand: tree.root().demand,
            decision: d.clone(),
        });
        state = state.advance(model, &plan);
        initial_pending.get_or_insert(plan.pending);
    }
    Ok(Schedule {
        initial_state: initial,
        initial_pending: initial_pending.unwrap_or_default(),
        hours,
        final_state: state,
    })
}
