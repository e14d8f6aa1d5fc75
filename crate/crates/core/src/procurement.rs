//! The two ways of buying frequency security: co-optimized with energy at
//! every rolling step, or unlinked, where a month-ahead requirement is derived
//! from an energy-only run and then enforced as fixed rows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::validate::{validate_schedule, Violation};
use crate::formulation::{build_suc, CostBreakdown, FormulationOptions, PlanState, RootPlan};
use crate::frequency::{min_inertia_for_rocof, min_pfr_for_nadir};
use crate::mip::{solve, SolveOptions};
use crate::scenario::{rolling_plan, ActualTrace, CommittedHour, ErrorModel, ScenarioTree, TreeConfig};
use crate::system::{FrequencyParams, SystemModel};

/// Window and solver settings for one pipeline run. The model's series must
/// cover `start_hour + steps + tree.horizon` hours.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tree: TreeConfig,
    pub error_model: ErrorModel,
    pub solve: SolveOptions,
    pub start_hour: usize,
    pub steps: usize,
}

/// Solves one tree and returns its root decision.
pub fn plan_step(
    model: &SystemModel,
    tree: &ScenarioTree,
    state: &PlanState,
    opts: &FormulationOptions,
    solve_opts: &SolveOptions,
) -> Result<RootPlan> {
    let suc = build_suc(model, tree, state, opts)?;
    let sol = solve(&suc.problem, solve_opts)?;
    if !sol.has_solution() {
        return Err(Error::Unsolved(format!("{:?}", sol.status)));
    }
    log::debug!(
        "hour {} status {:?} gap {:.2e} nodes {} cuts {}",
        tree.root().hour,
        sol.status,
        sol.mip_gap,
        sol.stats.nodes,
        sol.stats.cuts
    );
    Ok(suc.root_plan(&sol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub label: String,
    pub options: FormulationOptions,
    /// Set for unlinked runs.
    pub requirement: Option<ResponseRequirement>,
    pub initial_state: PlanState,
    pub initial_pending: Vec<Vec<u32>>,
    pub hours: Vec<CommittedHour>,
}

impl RunResult {
    pub fn cost(&self) -> CostBreakdown {
        let mut c = CostBreakdown::default();
        for h in &self.hours {
            c.add(&h.cost);
        }
        c
    }

    pub fn total_cost(&self) -> f64 {
        self.cost().total()
    }

    pub fn inertia(&self) -> Vec<f64> {
        self.hours.iter().map(|h| h.inertia).collect()
    }

    pub fn pfr(&self) -> Vec<f64> {
        self.hours.iter().map(|h| h.pfr).collect()
    }

    pub fn efr(&self) -> Vec<f64> {
        self.hours.iter().map(|h| h.efr).collect()
    }

    /// Replays the committed hours against the constraints they were planned
    /// under.
    pub fn violations(&self, model: &SystemModel) -> Vec<Violation> {
        validate_schedule(model, &self.initial_state, &self.initial_pending, &self.hours, &self.options)
    }

    /// Column names of [`RunResult::hourly_rows`].
    pub fn hourly_header(model: &SystemModel) -> Vec<String> {
        let mut header: Vec<String> = [
            "run", "hour", "demand_mw", "wind_available_mw", "wind_used_mw", "load_shed_mw", "startup_gbp",
            "no_load_gbp", "marginal_gbp", "shed_gbp", "total_gbp", "inertia_mws", "pfr_mw", "efr_mw",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(model.thermal_classes.iter().map(|c| format!("{}_online", c.name)));
        header.extend(model.thermal_classes.iter().map(|c| format!("{}_mw", c.name)));
        header
    }

    pub fn hourly_rows(&self) -> Vec<Vec<String>> {
        self.hours
            .iter()
            .map(|h| {
                let d = &h.decision;
                let mut row = vec![
                    self.label.clone(),
                    h.hour.to_string(),
                    h.demand.to_string(),
                    h.wind_available.to_string(),
                    d.wind_used.to_string(),
                    d.load_shed.to_string(),
                    h.cost.startup.to_string(),
                    h.cost.no_load.to_string(),
                    h.cost.marginal.to_string(),
                    h.cost.shed.to_string(),
                    h.cost.total().to_string(),
                    h.inertia.to_string(),
                    h.pfr.to_string(),
                    h.efr.to_string(),
                ];
                row.extend(d.classes.iter().map(|c| c.n_up.to_string()));
                row.extend(d.classes.iter().map(|c| c.power.to_string()));
                row
            })
            .collect()
    }

    /// One row per committed hour.
    pub fn write_hourly_csv<W: Write>(&self, model: &SystemModel, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::hourly_header(model))?;
        for row in self.hourly_rows() {
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Month-ahead service volumes for the unlinked pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRequirement {
    /// MW·s.
    pub inertia_floor: f64,
    /// MW.
    pub pfr_volume: f64,
    /// MW.
    pub efr_volume: f64,
}

fn run(
    model: &SystemModel,
    cfg: &RunConfig,
    label: &str,
    opts: FormulationOptions,
    requirement: Option<ResponseRequirement>,
) -> Result<RunResult> {
    let initial = PlanState::initial(model);
    let actual = ActualTrace::from_model(model);
    let schedule = rolling_plan(
        model,
        |tree, state| plan_step(model, tree, state, &opts, &cfg.solve),
        cfg.start_hour,
        cfg.steps,
        &actual,
        &cfg.tree,
        &cfg.error_model,
        initial,
    )?;
    Ok(RunResult {
        label: label.to_string(),
        options: opts,
        requirement,
        initial_state: schedule.initial_state,
        initial_pending: schedule.initial_pending,
        hours: schedule.hours,
    })
}

pub fn run_energy_only(model: &SystemModel, cfg: &RunConfig) -> Result<RunResult> {
    run(model, cfg, "energy-only", FormulationOptions::energy_only(), None)
}

/// Rolling plan with the frequency rows at every node. `efr_volume` pins
/// total EFR; `None` leaves it to the optimizer within battery capability.
pub fn run_cooptimized(model: &SystemModel, cfg: &RunConfig, efr_volume: Option<f64>) -> Result<RunResult> {
    run(model, cfg, "co-optimized", FormulationOptions::cooptimized(efr_volume), None)
}

pub fn compute_response_requirement(
    energy_only: &RunResult,
    efr_volume: f64,
    fp: &FrequencyParams,
) -> Result<ResponseRequirement> {
    if energy_only.hours.is_empty() {
        return Err(Error::Precondition("energy-only run has no hours".into()));
    }
    let observed = energy_only.hours.iter().map(|h| h.inertia).fold(f64::INFINITY, f64::min);
    let inertia_floor = observed.max(min_inertia_for_rocof(fp));
    let pfr_volume = if fp.largest_loss <= 0.0 {
        0.0
    } else {
        min_pfr_for_nadir(inertia_floor, efr_volume, fp)?.max(fp.largest_loss - efr_volume).max(0.0)
    };
    Ok(ResponseRequirement {
        inertia_floor,
        pfr_volume,
        efr_volume,
    })
}

/// Runs the energy-only step and derives the requirement from it, then runs
/// the constrained step. Returns the constrained run and the energy-only run.
pub fn run_unlinked_with_base(model: &SystemModel, cfg: &RunConfig, efr_volume: f64) -> Result<(RunResult, RunResult)> {
    let base = run_energy_only(model, cfg)?;
    let req = compute_response_requirement(&base, efr_volume, &model.freq)?;
    let opts = FormulationOptions::unlinked(req.pfr_volume, req.efr_volume, req.inertia_floor);
    let res = run(model, cfg, "unlinked", opts, Some(req))?;
    Ok((res, base))
}

pub fn run_unlinked(model: &SystemModel, cfg: &RunConfig, efr_volume: f64) -> Result<RunResult> {
    run_unlinked_with_base(model, cfg, efr_volume).map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    CoOptimized { efr_volume: Option<f64> },
    Unlinked { efr_volume: f64 },
}

/// Realized cost of a strategy run minus that of the energy-only run on the
/// same trace.
pub fn frequency_service_cost(strategy: &RunResult, energy_only: &RunResult) -> Result<f64> {
    if strategy.hours.len() != energy_only.hours.len()
        || strategy.hours.iter().zip(&energy_only.hours).any(|(a, b)| a.hour != b.hour)
    {
        return Err(Error::Coverage("runs cover different hours".into()));
    }
    Ok(strategy.total_cost() - energy_only.total_cost())
}

pub fn cost_of_frequency_services(model: &SystemModel, cfg: &RunConfig, strategy: Strategy) -> Result<f64> {
    match strategy {
        Strategy::CoOptimized { efr_volume } => {
            let base = run_energy_only(model, cfg)?;
            let res = run_cooptimized(model, cfg, efr_volume)?;
            frequency_service_cost(&res, &base)
        }
        Strategy::Unlinked { efr_volume } => {
            let (res, base) = run_unlinked_with_base(model, cfg, efr_volume)?;
            frequency_service_cost(&res, &base)
        }
    }
}

/// Mean ratio of realized inertia to the RoCoF minimum.
pub fn overprocurement_ratio(run: &RunResult, fp: &FrequencyParams) -> Result<f64> {
    inertia_ratio(&run.inertia(), fp)
}

pub fn inertia_ratio(inertia: &[f64], fp: &FrequencyParams) -> Result<f64> {
    if inertia.is_empty() {
        return Err(Error::Precondition("no hours to average".into()));
    }
    let h_min = min_inertia_for_rocof(fp);
    if h_min <= 0.0 {
        return Err(Error::Precondition("minimum inertia is zero, the ratio is undefined".into()));
    }
    Ok(inertia.iter().map(|h| h / h_min).sum::<f64>() / inertia.len() as f64)
}
