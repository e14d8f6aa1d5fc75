//! Month-by-month case studies and the report files they produce.
//!
//! Each month gets its own synthetic trace, extended at the end by wrapping
//! around to its first hours so the last rolling steps still see a full
//! horizon. By default only a representative week (the second week of the
//! month) is simulated and its costs are scaled up to the month.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{simulate_post_fault, ServicePoint};
use crate::mip::SolveOptions;
use crate::procurement::{
    frequency_service_cost, inertia_ratio, run_cooptimized, run_energy_only, run_unlinked_with_base, RunConfig,
    RunResult,
};
use crate::scenario::{ErrorModel, TreeConfig};
use crate::system::synth::{month_hours, synth_profiles, wind_mean_cf};
use crate::formulation::CostBreakdown;
use crate::system::SystemModel;

pub const MEAN_DEMAND_MW: f64 = 43_000.0;
pub const WEEK_HOURS: usize = 168;
/// First hour of the representative week.
pub const WEEK_START: usize = 168;
/// Branch-and-bound nodes allowed per rolling solve after the root.
pub const DEFAULT_NODE_LIMIT: usize = 5;

pub const CURRENT: (f64, f64) = (25_000.0, 1_320.0);
pub const FUTURE: (f64, f64) = (50_000.0, 1_800.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "unlink-1")]
    Unlink1,
    #[serde(rename = "unlink-2")]
    Unlink2,
    #[serde(rename = "co-opt-1")]
    CoOpt1,
    #[serde(rename = "co-opt-2")]
    CoOpt2,
    #[serde(rename = "custom")]
    Custom,
}

impl ScenarioName {
    /// (wind MW, largest loss MW) fixed by a named scenario.
    pub fn pinned(self) -> Option<(f64, f64)> {
        match self {
            ScenarioName::Unlink1 | ScenarioName::CoOpt1 => Some(CURRENT),
            ScenarioName::Unlink2 | ScenarioName::CoOpt2 => Some(FUTURE),
            ScenarioName::Custom => None,
        }
    }

    pub fn strategies(self) -> &'static [StrategyKind] {
        match self {
            ScenarioName::Unlink1 | ScenarioName::Unlink2 => &[StrategyKind::Unlinked],
            ScenarioName::CoOpt1 | ScenarioName::CoOpt2 => &[StrategyKind::CoOptimized],
            ScenarioName::Custom => &[StrategyKind::CoOptimized, StrategyKind::Unlinked],
        }
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unlink-1" => ScenarioName::Unlink1,
            "unlink-2" => ScenarioName::Unlink2,
            "co-opt-1" => ScenarioName::CoOpt1,
            "co-opt-2" => ScenarioName::CoOpt2,
            "custom" => ScenarioName::Custom,
            _ => return Err(Error::validation("scenario", format!("unknown scenario {s:?}"))),
        })
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioName::Unlink1 => "unlink-1",
            ScenarioName::Unlink2 => "unlink-2",
            ScenarioName::CoOpt1 => "co-opt-1",
            ScenarioName::CoOpt2 => "co-opt-2",
            ScenarioName::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "co-optimized")]
    CoOptimized,
    #[serde(rename = "unlinked")]
    Unlinked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EfrMode {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "fixed-200")]
    Fixed200,
    #[serde(rename = "optimized")]
    Optimized,
}

impl FromStr for EfrMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => EfrMode::None,
            "fixed-200" => EfrMode::Fixed200,
            "optimized" => EfrMode::Optimized,
            _ => return Err(Error::validation("efr", format!("unknown EFR mode {s:?}"))),
        })
    }
}

impl EfrMode {
    /// EFR volume for the co-optimized rows; `None` lets the solve pick it.
    pub fn cooptimized_volume(self) -> Option<f64> {
        match self {
            EfrMode::None => Some(0.0),
            EfrMode::Fixed200 => Some(200.0),
            EfrMode::Optimized => None,
        }
    }

    /// The unlinked pipeline cannot optimize a volume, so `Optimized` buys
    /// the fixed 200 MW.
    pub fn unlinked_volume(self) -> f64 {
        match self {
            EfrMode::None => 0.0,
            EfrMode::Fixed200 | EfrMode::Optimized => 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioName,
    pub months: Vec<u32>,
    pub wind_capacity: f64,
    pub largest_loss: f64,
    /// `None` uses the strategy default: optimized for co-optimized runs,
    /// 200 MW for unlinked runs.
    pub efr_mode: Option<EfrMode>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub sensitivity_grid: bool,
    pub full_month: bool,
    pub mean_demand: f64,
    pub tree: TreeConfig,
    pub solve: SolveOptions,
}

pub fn default_solve_options() -> SolveOptions {
    SolveOptions {
        node_limit: Some(DEFAULT_NODE_LIMIT),
        ..SolveOptions::default()
    }
}

impl ExperimentSpec {
    /// Defaults for a named scenario; `custom` starts from the future system.
    pub fn new(scenario: ScenarioName, out_dir: impl Into<PathBuf>) -> Self {
        let (wind, loss) = scenario.pinned().unwrap_or(FUTURE);
        ExperimentSpec {
            scenario,
            months: (1..=12).collect(),
            wind_capacity: wind,
            largest_loss: loss,
            efr_mode: None,
            seed: 1,
            out_dir: out_dir.into(),
            sensitivity_grid: false,
            full_month: false,
            mean_demand: MEAN_DEMAND_MW,
            tree: TreeConfig::default(),
            solve: default_solve_options(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.months.is_empty() {
            return Err(Error::validation("months", "no months selected"));
        }
        if let Some(m) = self.months.iter().find(|m| !(1..=12).contains(*m)) {
            return Err(Error::validation("months", format!("month {m} outside 1..=12")));
        }
        if self.months.iter().enumerate().any(|(i, m)| self.months[..i].contains(m)) {
            return Err(Error::validation("months", "duplicate month"));
        }
        if let Some((w, l)) = self.scenario.pinned() {
            if w != self.wind_capacity || l != self.largest_loss {
                return Err(Error::validation(
                    "scenario",
                    format!("{} fixes wind at {w} MW and the largest loss at {l} MW", self.scenario),
                ));
            }
        }
        if !(self.wind_capacity.is_finite() && self.wind_capacity >= 0.0) {
            return Err(Error::validation("wind_capacity_mw", "must be >= 0"));
        }
        if !(self.largest_loss.is_finite() && self.largest_loss >= 0.0) {
            return Err(Error::validation("largest_loss_mw", "must be >= 0"));
        }
        if !(self.solve.gap_tol.is_finite() && self.solve.gap_tol >= 0.0) {
            return Err(Error::validation("gap", "must be >= 0"));
        }
        Ok(())
    }
}

/// Fleet for a (wind, loss) pair: the current fleet (one 1.32 GW nuclear
/// unit) when the loss is the current one, the future fleet otherwise.
pub fn fleet_for(wind_capacity: f64, largest_loss: f64) -> SystemModel {
    let base = if largest_loss == CURRENT.1 {
        SystemModel::gb_current()
    } else {
        SystemModel::gb_future()
    };
    base.with_scenario(wind_capacity, largest_loss)
}

/// One month's model and rolling window.
#[derive(Debug, Clone)]
pub struct MonthCase {
    pub month: u32,
    pub model: SystemModel,
    pub config: RunConfig,
    /// Factor from simulated hours to the whole month.
    pub scale: f64,
}

pub fn month_case(
    fleet: &SystemModel,
    month: u32,
    seed: u64,
    mean_demand: f64,
    full_month: bool,
    tree: &TreeConfig,
    solve: &SolveOptions,
) -> Result<MonthCase> {
    let profiles = synth_profiles(seed, &[month], mean_demand, fleet.wind_capacity)?;
    let hours = month_hours(month);
    let wrap = |v: &[f64]| -> Vec<f64> { v.iter().chain(v.iter()).take(hours + tree.horizon).copied().collect() };
    let mut model = fleet.clone();
    model.demand_series = wrap(&profiles.demand_mw);
    model.wind_cf_series = wrap(&profiles.wind_cf);
    model.validate()?;
    let (start_hour, steps) = if full_month { (0, hours) } else { (WEEK_START, WEEK_HOURS) };
    Ok(MonthCase {
        month,
        model,
        config: RunConfig {
            tree: tree.clone(),
            error_model: ErrorModel::new(wind_mean_cf(month)),
            solve: solve.clone(),
            start_hour,
            steps,
        },
        scale: hours as f64 / steps as f64,
    })
}

/// Runs of one month: the energy-only base first, then one per strategy.
#[derive(Debug, Clone)]
pub struct MonthOutcome {
    pub month: u32,
    pub scale: f64,
    pub energy_only: RunResult,
    pub strategies: Vec<RunResult>,
}

impl MonthOutcome {
    pub fn strategy(&self, label: &str) -> Option<&RunResult> {
        self.strategies.iter().find(|r| r.label == label)
    }
}

pub fn run_month(case: &MonthCase, strategies: &[StrategyKind], efr: Option<EfrMode>) -> Result<MonthOutcome> {
    let mut energy_only = None;
    let mut out = Vec::new();
    for s in strategies {
        match s {
            StrategyKind::CoOptimized => {
                let v = efr.unwrap_or(EfrMode::Optimized).cooptimized_volume();
                out.push(run_cooptimized(&case.model, &case.config, v)?);
            }
            StrategyKind::Unlinked => {
                let v = efr.unwrap_or(EfrMode::Fixed200).unlinked_volume();
                let (r, base) = run_unlinked_with_base(&case.model, &case.config, v)?;
                out.push(r);
                energy_only.get_or_insert(base);
            }
        }
    }
    let energy_only = match energy_only {
        Some(e) => e,
        None => run_energy_only(&case.model, &case.config)?,
    };
    Ok(MonthOutcome {
        month: case.month,
        scale: case.scale,
        energy_only,
        strategies: out,
    })
}

/// Runs every month, spreading months over the available cores. Results
/// come back in month order whatever the scheduling.
pub fn run_months(
    fleet: &SystemModel,
    spec: &ExperimentSpec,
    strategies: &[StrategyKind],
) -> Result<Vec<MonthOutcome>> {
    let cases: Vec<MonthCase> = spec
        .months
        .iter()
        .map(|&m| month_case(fleet, m, spec.seed, spec.mean_demand, spec.full_month, &spec.tree, &spec.solve))
        .collect::<Result<_>>()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cases.len()).max(1);
    if workers == 1 {
        return cases.iter().map(|c| run_month(c, strategies, spec.efr_mode)).collect();
    }
    let mut slots: Vec<Option<Result<MonthOutcome>>> = (0..cases.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks = slots.chunks_mut(cases.len().div_ceil(workers)).zip(cases.chunks(cases.len().div_ceil(workers)));
        for (out, mine) in chunks {
            scope.spawn(move || {
                for (slot, case) in out.iter_mut().zip(mine) {
                    *slot = Some(run_month(case, strategies, spec.efr_mode));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every month ran")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub label: String,
    /// £ over the selected months, scaled to whole months.
    pub total_cost: f64,
    pub startup: f64,
    pub no_load: f64,
    pub marginal: f64,
    pub shed: f64,
    /// Cost above the energy-only run, £.
    pub frequency_service_cost: Option<f64>,
    pub mean_inertia: f64,
    pub overprocurement_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSummary {
    pub scenario: ScenarioName,
    pub months: Vec<u32>,
    pub wind_capacity_mw: f64,
    pub largest_loss_mw: f64,
    pub efr_mode: Option<EfrMode>,
    pub seed: u64,
    pub full_month: bool,
    pub strategies: Vec<StrategySummary>,
    /// Unlinked minus co-optimized cost, £, when both ran.
    pub savings: Option<f64>,
    /// Relative increase of the frequency-service cost under the unlinked
    /// strategy, when both ran.
    pub unlinked_premium: Option<f64>,
}

/// Totals of one strategy label across months, scaled.
pub fn summarize(outcomes: &[MonthOutcome], label: &str, model: &SystemModel) -> Result<StrategySummary> {
    let mut c = CostBreakdown::default();
    let mut fsc = 0.0;
    let mut inertia = Vec::new();
    let energy = label == "energy-only";
    for o in outcomes {
        let r = if energy {
            &o.energy_only
        } else {
            o.strategy(label)
                .ok_or_else(|| Error::Coverage(format!("month {} has no {label} run", o.month)))?
        };
        c.add(&r.cost().scaled(o.scale));
        if !energy {
            fsc += frequency_service_cost(r, &o.energy_only)? * o.scale;
        }
        inertia.extend(r.inertia());
    }
    let mean_inertia = inertia.iter().sum::<f64>() / inertia.len().max(1) as f64;
    Ok(StrategySummary {
        label: label.to_string(),
        total_cost: c.total(),
        startup: c.startup,
        no_load: c.no_load,
        marginal: c.marginal,
        shed: c.shed,
        frequency_service_cost: (!energy).then_some(fsc),
        mean_inertia,
        overprocurement_ratio: inertia_ratio(&inertia, &model.freq).ok(),
    })
}

pub fn annual_summary(spec: &ExperimentSpec, fleet: &SystemModel, outcomes: &[MonthOutcome]) -> Result<AnnualSummary> {
    let mut strategies = vec![summarize(outcomes, "energy-only", fleet)?];
    for s in spec.scenario.strategies() {
        strategies.push(summarize(outcomes, label_of(*s), fleet)?);
    }
    let find = |l: &str| strategies.iter().find(|s| s.label == l);
    let (savings, unlinked_premium) = match (find("co-optimized"), find("unlinked")) {
        (Some(co), Some(un)) => {
            let premium = match (co.frequency_service_cost, un.frequency_service_cost) {
                (Some(a), Some(b)) if a > 0.0 => Some((b - a) / a),
                _ => None,
            };
            (Some(un.total_cost - co.total_cost), premium)
        }
        _ => (None, None),
    };
    Ok(AnnualSummary {
        scenario: spec.scenario,
        months: spec.months.clone(),
        wind_capacity_mw: spec.wind_capacity,
        largest_loss_mw: spec.largest_loss,
        efr_mode: spec.efr_mode,
        seed: spec.seed,
        full_month: spec.full_month,
        strategies,
        savings,
        unlinked_premium,
    })
}

pub fn label_of(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::CoOptimized => "co-optimized",
        StrategyKind::Unlinked => "unlinked",
    }
}

/// One cell of the wind/loss sensitivity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub wind_capacity_mw: f64,
    pub largest_loss_mw: f64,
    pub strategy: String,
    pub frequency_service_cost: f64,
}

pub const GRID_WIND: [f64; 2] = [25_000.0, 50_000.0];
pub const GRID_LOSS: [f64; 2] = [1_320.0, 1_800.0];

pub fn sensitivity_grid(spec: &ExperimentSpec) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    let both = [StrategyKind::CoOptimized, StrategyKind::Unlinked];
    for &wind in &GRID_WIND {
        for &loss in &GRID_LOSS {
            let fleet = fleet_for(wind, loss);
            let outcomes = run_months(&fleet, spec, &both)?;
            for s in both {
                let sum = summarize(&outcomes, label_of(s), &fleet)?;
                cells.push(GridCell {
                    wind_capacity_mw: wind,
                    largest_loss_mw: loss,
                    strategy: sum.label,
                    frequency_service_cost: sum.frequency_service_cost.unwrap_or(0.0),
                });
            }
        }
    }
    Ok(cells)
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    pub summary: AnnualSummary,
}

/// Runs the experiment and writes its report files into `spec.out_dir`.
/// Files are staged and only moved into place once everything succeeded.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir)?;
    let staging = spec.out_dir.join(".partial");
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    let result = write_reports(spec, &staging);
    let outcome = result.and_then(|(names, summary)| {
        let mut files = Vec::new();
        for n in names {
            let dest = spec.out_dir.join(&n);
            fs::rename(staging.join(&n), &dest)?;
            files.push(dest);
        }
        Ok(ExperimentReport { files, summary })
    });
    let _ = fs::remove_dir_all(&staging);
    outcome
}

fn write_reports(spec: &ExperimentSpec, dir: &Path) -> Result<(Vec<String>, AnnualSummary)> {
    let fleet = fleet_for(spec.wind_capacity, spec.largest_loss);
    let outcomes = run_months(&fleet, spec, spec.scenario.strategies())?;
    let mut names = Vec::new();

    let mut labels = vec!["energy-only"];
    labels.extend(spec.scenario.strategies().iter().map(|s| label_of(*s)));
    for label in &labels {
        let name = format!("hourly_{label}.csv");
        let mut w = csv::Writer::from_path(dir.join(&name))?;
        let mut header = vec!["month".to_string(), "scale".to_string()];
        header.extend(RunResult::hourly_header(&fleet));
        w.write_record(&header)?;
        for o in &outcomes {
            let r = if *label == "energy-only" { &o.energy_only } else { o.strategy(label).expect("ran") };
            for row in r.hourly_rows() {
                let mut full = vec![o.month.to_string(), o.scale.to_string()];
                full.extend(row);
                w.write_record(&full)?;
            }
        }
        w.flush()?;
        names.push(name);
    }

    let name = "monthly.csv".to_string();
    let mut w = csv::Writer::from_path(dir.join(&name))?;
    w.write_record([
        "month",
        "strategy",
        "simulated_hours",
        "scale",
        "startup_gbp",
        "no_load_gbp",
        "marginal_gbp",
        "shed_gbp",
        "total_gbp",
        "frequency_service_gbp",
        "inertia_floor_mws",
        "pfr_volume_mw",
        "efr_volume_mw",
    ])?;
    for o in &outcomes {
        for label in &labels {
            let r = if *label == "energy-only" { &o.energy_only } else { o.strategy(label).expect("ran") };
            let c = r.cost().scaled(o.scale);
            let fsc = if *label == "energy-only" {
                String::new()
            } else {
                (frequency_service_cost(r, &o.energy_only)? * o.scale).to_string()
            };
            let req = |f: fn(&crate::procurement::ResponseRequirement) -> f64| {
                r.requirement.as_ref().map_or(String::new(), |q| f(q).to_string())
            };
            w.write_record([
                o.month.to_string(),
                label.to_string(),
                r.hours.len().to_string(),
                o.scale.to_string(),
                c.startup.to_string(),
                c.no_load.to_string(),
                c.marginal.to_string(),
                c.shed.to_string(),
                c.total().to_string(),
                fsc,
                req(|q| q.inertia_floor),
                req(|q| q.pfr_volume),
                req(|q| q.efr_volume),
            ])?;
        }
    }
    w.flush()?;
    names.push(name);

    // spot checks: the least-inertia hour of every secured run
    for o in &outcomes {
        for r in &o.strategies {
            let Some(h) = r.hours.iter().min_by(|a, b| a.inertia.total_cmp(&b.inertia)) else {
                continue;
            };
            if h.inertia <= 0.0 || fleet.freq.largest_loss <= 0.0 {
                continue;
            }
            let traj = simulate_post_fault(&ServicePoint::new(h.inertia, h.efr, h.pfr), &fleet.freq, 0.01, 60.0)?;
            let name = format!("trajectory_{}_m{:02}_h{}.csv", r.label, o.month, h.hour);
            let mut f = fs::File::create(dir.join(&name))?;
            traj.write_csv(&mut f)?;
            names.push(name);
        }
    }

    if spec.sensitivity_grid {
        let name = "sensitivity.csv".to_string();
        let mut w = csv::Writer::from_path(dir.join(&name))?;
        w.write_record(["wind_capacity_mw", "largest_loss_mw", "strategy", "frequency_service_gbp"])?;
        for c in sensitivity_grid(spec)? {
            w.write_record([
                c.wind_capacity_mw.to_string(),
                c.largest_loss_mw.to_string(),
                c.strategy,
                c.frequency_service_cost.to_string(),
            ])?;
        }
        w.flush()?;
        names.push(name);
    }

    let summary = annual_summary(spec, &fleet, &outcomes)?;
    let name = "annual.json".to_string();
    fs::write(dir.join(&name), serde_json::to_string_pretty(&summary)? + "\n")?;
    names.push(name);
    Ok((names, summary))
}

/// Cost of one month in an hourly report, scaled to the whole month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthDelta {
    pub month: u32,
    pub cost_a: f64,
    pub cost_b: f64,
    pub delta: f64,
    /// `delta / cost_a`.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub months: Vec<MonthDelta>,
    pub annual_a: f64,
    pub annual_b: f64,
    pub annual_delta: f64,
    /// Frequency-service costs against the baseline, when one was given.
    pub frequency_service_a: Option<f64>,
    pub frequency_service_b: Option<f64>,
    /// Relative change of the frequency-service cost from `a` to `b`.
    pub frequency_service_change: Option<f64>,
}

struct HourlyFile {
    /// (month, hour) per row
    keys: Vec<(u32, usize)>,
    /// month, scale, scaled month total
    months: Vec<(u32, f64, f64)>,
}

fn read_hourly(path: &Path) -> Result<HourlyFile> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Report(format!("{}: no column {name:?}", path.display())))
    };
    let (cm, cs, ch, ct) = (col("month")?, col("scale")?, col("hour")?, col("total_gbp")?);
    let mut keys = Vec::new();
    let mut months: Vec<(u32, f64, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Report(format!("{}: bad number {:?}: {e}", path.display(), &rec[i])))
        };
        let month = parse(cm)? as u32;
        let scale = parse(cs)?;
        keys.push((month, parse(ch)? as usize));
        let total = parse(ct)?;
        match months.last_mut() {
            Some(m) if m.0 == month => m.2 += total * scale,
            _ => months.push((month, scale, total * scale)),
        }
    }
    Ok(HourlyFile { keys, months })
}

/// Compares two hourly reports covering the same hours. `baseline`, an
/// energy-only report over the same hours, enables the frequency-service
/// figures.
pub fn compare_runs(a: &Path, b: &Path, baseline: Option<&Path>) -> Result<DeltaReport> {
    let fa = read_hourly(a)?;
    let fb = read_hourly(b)?;
    if fa.keys != fb.keys {
        return Err(Error::Coverage(format!(
            "{} has {} hours, {} has {} hours, or they differ in months/hours",
            a.display(),
            fa.keys.len(),
            b.display(),
            fb.keys.len()
        )));
    }
    let months: Vec<MonthDelta> = fa
        .months
        .iter()
        .zip(&fb.months)
        .map(|(x, y)| MonthDelta {
            month: x.0,
            cost_a: x.2,
            cost_b: y.2,
            delta: y.2 - x.2,
            relative: if x.2 != 0.0 { (y.2 - x.2) / x.2 } else { 0.0 },
        })
        .collect();
    let annual_a: f64 = fa.months.iter().map(|m| m.2).sum();
    let annual_b: f64 = fb.months.iter().map(|m| m.2).sum();
    let (mut fsa, mut fsb, mut change) = (None, None, None);
    if let Some(base) = baseline {
        let fe = read_hourly(base)?;
        if fe.keys != fa.keys {
            return Err(Error::Coverage(format!("{} covers different hours", base.display())));
        }
        let e: f64 = fe.months.iter().map(|m| m.2).sum();
        fsa = Some(annual_a - e);
        fsb = Some(annual_b - e);
        change = (annual_a - e != 0.0).then(|| (annual_b - annual_a) / (annual_a - e));
    }
    Ok(DeltaReport {
        months,
        annual_a,
        annual_b,
        annual_delta: annual_b - annual_a,
        frequency_service_a: fsa,
        frequency_service_b: fsb,
        frequency_service_change: change,
    })
}
