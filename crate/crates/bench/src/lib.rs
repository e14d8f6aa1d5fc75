//! Fixtures shared by the benchmarks.

use fsuc_core::experiment::{default_solve_options, fleet_for, month_case, MonthCase, CURRENT, FUTURE, MEAN_DEMAND_MW};
use fsuc_core::scenario::{build_tree, RootState, ScenarioTree, TreeConfig};

/// January of the current or future system with the default tree.
pub fn case(future: bool) -> MonthCase {
    let (wind, loss) = if future { FUTURE } else { CURRENT };
    month_case(
        &fleet_for(wind, loss),
        1,
        1,
        MEAN_DEMAND_MW,
        false,
        &TreeConfig::default(),
        &default_solve_options(),
    )
    .expect("built-in fleet and profiles are valid")
}

/// The tree the rolling planner builds at `hour`.
pub fn tree_at(case: &MonthCase, hour: usize) -> ScenarioTree {
    let m = &case.model;
    let t = &case.config.tree;
    let root = RootState {
        hour,
        wind_mw: m.wind_power(hour),
        wind_capacity: m.wind_capacity,
        demand: m.demand_series[hour..=hour + t.horizon].to_vec(),
        wind_median: None,
    };
    build_tree(&root, &t.quantiles, &t.weights, t.horizon, &t.branch_stages, &case.config.error_model)
        .expect("default tree is valid")
}
