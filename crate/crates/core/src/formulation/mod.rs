//! Stochastic unit commitment over a scenario tree.
//!
//! Commitment is clustered: each thermal class carries an integer count of
//! online units and of units coming online. A class with a start-up time of
//! `L` hours notifies starts `L` hours before they come online, so the first
//! `L` hours of any tree are fed from a queue of starts notified at or before
//! the root.

mod build;
pub mod validate;

use serde::{Deserialize, Serialize};

use crate::system::{SystemModel, ThermalClass};

pub use build::{build_suc, SucProblem};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassDecision {
    pub n_up: u32,
    /// Units that start generating at this node.
    pub n_sg: u32,
    /// Starts notified at this node, online `startup_time` hours later.
    pub notified: u32,
    pub shutdowns: u32,
    /// MW.
    pub power: f64,
    /// MW.
    pub pfr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StorageDecision {
    pub charge: f64,
    pub discharge: f64,
    /// MWh at the end of the node's interval.
    pub soc: f64,
    pub efr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeDecision {
    pub classes: Vec<ClassDecision>,
    pub storage: Vec<StorageDecision>,
    pub wind_used: f64,
    pub wind_curtailed: f64,
    pub load_shed: f64,
    /// Surplus must-run output that has nowhere to go.
    pub spill: f64,
}

impl NodeDecision {
    pub fn total_pfr(&self) -> f64 {
        self.classes.iter().map(|c| c.pfr).sum()
    }

    pub fn total_efr(&self) -> f64 {
        self.storage.iter().map(|s| s.efr).sum()
    }

    pub fn n_up(&self) -> Vec<u32> {
        self.classes.iter().map(|c| c.n_up).collect()
    }
}

/// Which frequency rows the problem carries.
///
/// * `frequency_constraints` on: RoCoF, nadir cone and quasi-steady-state
///   rows at every node. `fixed_efr_volume` pins total EFR, otherwise EFR is
///   optimized up to storage capability.
/// * off with any fixed volume set: the unlinked rows (PFR requirement, EFR
///   volume, inertia floor).
/// * off with nothing set: energy only, no response held.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FormulationOptions {
    pub frequency_constraints: bool,
    pub fixed_pfr_requirement: Option<f64>,
    pub fixed_efr_volume: Option<f64>,
    pub inertia_floor: Option<f64>,
}

impl FormulationOptions {
    pub fn energy_only() -> Self {
        Self::default()
    }

    pub fn cooptimized(efr_volume: Option<f64>) -> Self {
        FormulationOptions {
            frequency_constraints: true,
            fixed_efr_volume: efr_volume,
            ..Self::default()
        }
    }

    pub fn unlinked(pfr: f64, efr: f64, inertia_floor: f64) -> Self {
        FormulationOptions {
            frequency_constraints: false,
            fixed_pfr_requirement: Some(pfr),
            fixed_efr_volume: Some(efr),
            inertia_floor: Some(inertia_floor),
        }
    }

    pub fn is_unlinked(&self) -> bool {
        !self.frequency_constraints
            && (self.fixed_pfr_requirement.is_some()
                || self.fixed_efr_volume.is_some()
                || self.inertia_floor.is_some())
    }

    pub fn holds_response(&self) -> bool {
        self.frequency_constraints || self.fixed_pfr_requirement.is_some()
    }
}

/// Operating cost of one class at one node, £.
pub fn node_cost(tc: &ThermalClass, d: &ClassDecision, dt: f64) -> f64 {
    tc.startup_cost * f64::from(d.n_sg)
        + dt * (tc.no_load_cost * f64::from(d.n_up) + tc.marginal_cost * d.power)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub startup: f64,
    pub no_load: f64,
    pub marginal: f64,
    pub shed: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.startup + self.no_load + self.marginal + self.shed
    }

    pub fn add(&mut self, other: &CostBreakdown) {
        self.startup += other.startup;
        self.no_load += other.no_load;
        self.marginal += other.marginal;
        self.shed += other.shed;
    }

    pub fn scaled(&self, s: f64) -> CostBreakdown {
        CostBreakdown {
            startup: self.startup * s,
            no_load: self.no_load * s,
            marginal: self.marginal * s,
            shed: self.shed * s,
        }
    }
}

pub fn decision_cost(model: &SystemModel, d: &NodeDecision, dt: f64) -> CostBreakdown {
    let mut c = CostBreakdown::default();
    for (tc, cd) in model.thermal_classes.iter().zip(&d.classes) {
        c.startup += tc.startup_cost * f64::from(cd.n_sg);
        c.no_load += dt * tc.no_load_cost * f64::from(cd.n_up);
        c.marginal += dt * tc.marginal_cost * cd.power;
    }
    c.shed = dt * model.voll * d.load_shed;
    c
}

/// Post-fault inertia, MW·s: every online unit counts except one unit of the
/// loss class, which is the unit that trips.
pub fn system_inertia(n_up: &[u32], classes: &[ThermalClass], loss_class: Option<usize>) -> f64 {
    let total: f64 = classes
        .iter()
        .zip(n_up)
        .map(|(c, &n)| c.unit_inertia() * f64::from(n))
        .sum();
    match loss_class {
        Some(g) if n_up[g] > 0 => total - classes[g].unit_inertia(),
        _ => total,
    }
}

/// Carry-over between rolling steps for one thermal class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassState {
    pub online: u32,
    /// Units that came online in the preceding hours, most recent first.
    pub recent_starts: Vec<u32>,
    /// Units shut down in the preceding hours, most recent first.
    pub recent_shutdowns: Vec<u32>,
    /// Arrivals already notified for depths `0..startup_time`. `None` lets the
    /// solve choose them freely (nothing was notified before the first step).
    pub pending: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanState {
    pub classes: Vec<ClassState>,
    /// MWh per storage unit.
    pub soc: Vec<f64>,
}

/// Root decision of one solve plus the start-up queue it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootPlan {
    pub decision: NodeDecision,
    /// Per class, arrivals for depths `0..startup_time` as used by the solve.
    pub pending: Vec<Vec<u32>>,
}

impl PlanState {
    /// Must-run classes fully online, everything else off but free to start at
    /// once, storage half full.
    pub fn initial(model: &SystemModel) -> Self {
        PlanState {
            classes: model
                .thermal_classes
                .iter()
                .map(|c| ClassState {
                    online: if c.must_run { c.unit_count } else { 0 },
                    recent_starts: Vec::new(),
                    recent_shutdowns: Vec::new(),
                    pending: None,
                })
                .collect(),
            soc: model.storage.iter().map(|s| 0.5 * s.energy_cap).collect(),
        }
    }

    /// State one hour later, after committing `root`.
    pub fn advance(&self, model: &SystemModel, root: &RootPlan) -> PlanState {
        let classes = model
            .thermal_classes
            .iter()
            .zip(&self.classes)
            .zip(root.decision.classes.iter().zip(&root.pending))
            .map(|((tc, st), (d, queue))| {
                let keep_up = tc.min_up.saturating_sub(1) as usize;
                let keep_down = tc.min_down.saturating_sub(1) as usize;
                let mut starts = vec![d.n_sg];
                starts.extend(st.recent_starts.iter().copied());
                starts.truncate(keep_up);
                let mut downs = vec![d.shutdowns];
                downs.extend(st.recent_shutdowns.iter().copied());
                downs.truncate(keep_down);
                let pending = if tc.startup_time == 0 {
                    None
                } else {
                    let mut q: Vec<u32> = queue.iter().skip(1).copied().collect();
                    q.push(d.notified);
                    Some(q)
                };
                ClassState {
                    online: d.n_up,
                    recent_starts: starts,
                    recent_shutdowns: downs,
                    pending,
                }
            })
            .collect();
        PlanState {
            classes,
            soc: root.decision.storage.iter().map(|s| s.soc).collect(),
        }
    }
}
