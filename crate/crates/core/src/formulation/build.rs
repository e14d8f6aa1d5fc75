use crate::error::{Error, Result};
use crate::frequency::min_inertia_for_rocof;
use crate::mip::{LinExpr, MipProblem, Sense, Solution, Var};
use crate::scenario::ScenarioTree;
use crate::system::SystemModel;

use super::{ClassDecision, FormulationOptions, NodeDecision, PlanState, RootPlan, StorageDecision};

struct ClassVars {
    /// A variable, or the constant unit count for must-run classes.
    up: Vec<LinExpr>,
    power: Vec<Var>,
    pfr: Vec<Option<Var>>,
    notify: Vec<Option<Var>>,
    arrivals: Vec<LinExpr>,
    shutdowns: Vec<LinExpr>,
    pending: Vec<LinExpr>,
}

struct StorageVars {
    charge: Vec<Var>,
    discharge: Vec<Var>,
    soc: Vec<Var>,
    efr: Var,
}

/// A built problem together with the variable map needed to decode it.
pub struct SucProblem {
    pub problem: MipProblem,
    classes: Vec<ClassVars>,
    storage: Vec<StorageVars>,
    wind_used: Vec<Var>,
    wind_available: Vec<f64>,
    shed: Vec<Var>,
    spill: Vec<Var>,
}

fn count(x: f64) -> u32 {
    x.round().max(0.0) as u32
}

pub fn build_suc(
    model: &SystemModel,
    tree: &ScenarioTree,
    state: &PlanState,
    opts: &FormulationOptions,
) -> Result<SucProblem> {
    if opts.frequency_constraints && opts.fixed_pfr_requirement.is_some() {
        return Err(Error::OptionConflict(
            "a fixed PFR requirement cannot be combined with frequency constraints".into(),
        ));
    }
    if state.classes.len() != model.thermal_classes.len() || state.soc.len() != model.storage.len() {
        return Err(Error::Precondition("plan state does not match the system model".into()));
    }
    let fp = &model.freq;
    let nodes = &tree.nodes;
    let nn = nodes.len();
    let mut p = MipProblem::new();
    let holds_response = opts.holds_response();
    let unlinked = opts.is_unlinked();

    let mut classes = Vec::with_capacity(model.thermal_classes.len());
    for (g, tc) in model.thermal_classes.iter().enumerate() {
        let st = &state.classes[g];
        let cap = f64::from(tc.unit_count);
        let lag = tc.startup_time as usize;
        let name = &tc.name;
        let up: Vec<LinExpr> = (0..nn)
            .map(|n| {
                if tc.must_run {
                    LinExpr::constant(cap)
                } else {
                    LinExpr::term(p.add_var(format!("{name}_up_{n}"), 0.0, cap, true), 1.0)
                }
            })
            .collect();
        let p_lo = if tc.must_run { tc.min_stable_gen * cap } else { 0.0 };
        let power: Vec<Var> = (0..nn)
            .map(|n| p.add_var(format!("{name}_p_{n}"), p_lo, tc.rated_power * cap, false))
            .collect();
        let pfr_hi = if holds_response && tc.response_slope > 0.0 {
            tc.max_response * cap
        } else {
            0.0
        };
        let pfr: Vec<Option<Var>> = (0..nn)
            .map(|n| (pfr_hi > 0.0).then(|| p.add_var(format!("{name}_pfr_{n}"), 0.0, pfr_hi, false)))
            .collect();

        let pending: Vec<LinExpr> = if tc.must_run || lag == 0 {
            Vec::new()
        } else {
            match &st.pending {
                Some(q) if q.len() == lag => q.iter().map(|&a| LinExpr::constant(f64::from(a))).collect(),
                Some(q) => {
                    return Err(Error::Precondition(format!(
                        "class {name}: start-up queue has {} entries, expected {lag}",
                        q.len()
                    )))
                }
                None => (0..lag)
                    .map(|d| LinExpr::term(p.add_var(format!("{name}_prestart_{d}"), 0.0, cap, true), 1.0))
                    .collect(),
            }
        };
        let notify: Vec<Option<Var>> = nodes
            .iter()
            .map(|nd| {
                if tc.must_run || nd.depth + lag > tree.horizon {
                    None
                } else {
                    let id = nd.id;
                    Some(p.add_var(format!("{name}_start_{id}"), 0.0, cap, true))
                }
            })
            .collect();
        let arrivals: Vec<LinExpr> = nodes
            .iter()
            .map(|nd| {
                if tc.must_run {
                    LinExpr::new()
                } else if nd.depth < lag {
                    pending[nd.depth].clone()
                } else {
                    let a = tree.ancestor(nd.id, lag).expect("ancestor within tree");
                    notify[a].map_or_else(LinExpr::new, |v| LinExpr::term(v, 1.0))
                }
            })
            .collect();
        let prev_up = |n: usize| -> LinExpr {
            match nodes[n].parent {
                Some(par) => up[par].clone(),
                None => LinExpr::constant(f64::from(st.online)),
            }
        };
        let shutdowns: Vec<LinExpr> = (0..nn)
            .map(|n| {
                if tc.must_run {
                    return LinExpr::new();
                }
                let mut e = prev_up(n);
                e.add_expr(&arrivals[n], 1.0).add_expr(&up[n], -1.0);
                e
            })
            .collect();

        for (n, nd) in nodes.iter().enumerate() {
            let tag = |r: &str| format!("{name}_{r}_{n}");
            if let Some(r) = pfr[n] {
                let mut e = LinExpr::term(r, 1.0);
                e.add_expr(&up[n], -tc.max_response);
                p.add_row(tag("rcap"), e, Sense::Le, 0.0);
                let mut e = LinExpr::term(r, 1.0).with(power[n], tc.response_slope);
                e.add_expr(&up[n], -tc.response_slope * tc.rated_power);
                p.add_row(tag("rslope"), e, Sense::Le, 0.0);
            }
            if tc.must_run {
                continue;
            }
            let mut e = LinExpr::term(power[n], 1.0);
            e.add_expr(&up[n], -tc.min_stable_gen);
            p.add_row(tag("pmin"), e, Sense::Ge, 0.0);
            let mut e = LinExpr::term(power[n], 1.0);
            e.add_expr(&up[n], -tc.rated_power);
            p.add_row(tag("pmax"), e, Sense::Le, 0.0);
            p.add_row(tag("sd"), shutdowns[n].clone(), Sense::Ge, 0.0);

            if tc.min_up >= 1 {
                let mut e = up[n].scaled(-1.0);
                for k in 0..tc.min_up as usize {
                    match tree.ancestor(n, k) {
                        Some(a) => {
                            e.add_expr(&arrivals[a], 1.0);
                        }
                        None => {
                            let h = st.recent_starts.get(k - nd.depth - 1).copied().unwrap_or(0);
                            e.add_constant(f64::from(h));
                        }
                    }
                }
                p.add_row(tag("minup"), e, Sense::Le, 0.0);
            }
            if tc.min_down >= 1 || lag >= 1 {
                let mut e = up[n].clone();
                for k in 0..tc.min_down as usize {
                    match tree.ancestor(n, k) {
                        Some(a) => {
                            e.add_expr(&shutdowns[a], 1.0);
                        }
                        None => {
                            let h = st.recent_shutdowns.get(k - nd.depth - 1).copied().unwrap_or(0);
                            e.add_constant(f64::from(h));
                        }
                    }
                }
                // notified but not yet online
                for k in 0..lag {
                    if let Some(a) = tree.ancestor(n, k) {
                        if let Some(v) = notify[a] {
                            e.add(v, 1.0);
                        }
                    }
                }
                for q in pending.iter().take(lag).skip(nd.depth + 1) {
                    e.add_expr(q, 1.0);
                }
                p.add_row(tag("mindown"), e, Sense::Le, cap);
            }
        }
        classes.push(ClassVars {
            up,
            power,
            pfr,
            notify,
            arrivals,
            shutdowns,
            pending,
        });
    }

    let mut storage = Vec::with_capacity(model.storage.len());
    for (s, su) in model.storage.iter().enumerate() {
        let name = &su.name;
        let efr_hi = if opts.frequency_constraints || unlinked { su.efr_capacity } else { 0.0 };
        let efr = p.add_var(format!("{name}_efr"), 0.0, efr_hi, false);
        let charge: Vec<Var> = (0..nn)
            .map(|n| p.add_var(format!("{name}_ch_{n}"), 0.0, su.power_cap, false))
            .collect();
        let discharge: Vec<Var> = (0..nn)
            .map(|n| p.add_var(format!("{name}_dis_{n}"), 0.0, su.power_cap, false))
            .collect();
        let soc: Vec<Var> = (0..nn)
            .map(|n| p.add_var(format!("{name}_soc_{n}"), 0.0, su.energy_cap, false))
            .collect();
        let eta = su.one_way_eff();
        for (n, nd) in nodes.iter().enumerate() {
            let dt = nd.interval;
            let mut e = LinExpr::term(soc[n], 1.0)
                .with(charge[n], -eta * dt)
                .with(discharge[n], dt / eta);
            match nd.parent {
                Some(par) => {
                    e.add(soc[par], -1.0);
                }
                None => {
                    e.add_constant(-state.soc[s]);
                }
            }
            p.add_row(format!("{name}_soc_{n}"), e, Sense::Eq, 0.0);
            if efr_hi > 0.0 {
                p.add_row(
                    format!("{name}_efrcap_{n}"),
                    LinExpr::term(efr, 1.0).with(discharge[n], 1.0),
                    Sense::Le,
                    su.power_cap,
                );
            }
        }
        storage.push(StorageVars {
            charge,
            discharge,
            soc,
            efr,
        });
    }

    let wind_used: Vec<Var> = nodes
        .iter()
        .map(|nd| p.add_var(format!("wind_{}", nd.id), 0.0, nd.wind_available, false))
        .collect();
    let shed: Vec<Var> = nodes
        .iter()
        .map(|nd| p.add_var(format!("shed_{}", nd.id), 0.0, nd.demand, false))
        .collect();
    let spill: Vec<Var> = nodes
        .iter()
        .map(|nd| p.add_var(format!("spill_{}", nd.id), 0.0, f64::INFINITY, false))
        .collect();

    let efr_total = {
        let mut e = LinExpr::new();
        for sv in &storage {
            e.add(sv.efr, 1.0);
        }
        e
    };
    let efr_capability: f64 = model
        .storage
        .iter()
        .map(|s| if opts.frequency_constraints || unlinked { s.efr_capacity } else { 0.0 })
        .sum();
    if let Some(v) = opts.fixed_efr_volume {
        if v > efr_capability + 1e-9 || v < 0.0 {
            return Err(Error::Precondition(format!(
                "EFR volume {v} MW outside storage capability {efr_capability} MW"
            )));
        }
        if !efr_total.terms.is_empty() {
            p.add_row("efr_volume", efr_total.clone(), Sense::Eq, v);
        }
    }
    let loss = model.loss_class_index();
    let lost_inertia = match loss {
        Some(g) if model.thermal_classes[g].unit_count > 0 => model.thermal_classes[g].unit_inertia(),
        _ => 0.0,
    };
    let secured = opts.frequency_constraints && fp.largest_loss > 0.0;
    if secured && !efr_total.terms.is_empty() {
        p.add_row("efr_useful", efr_total.clone(), Sense::Le, fp.largest_loss);
    }

    let mut objective = LinExpr::new();
    for (n, nd) in nodes.iter().enumerate() {
        let w = nd.probability;
        let dt = nd.interval;
        let mut balance = LinExpr::new();
        let mut inertia = LinExpr::constant(-lost_inertia);
        let mut pfr_total = LinExpr::new();
        for (tc, cv) in model.thermal_classes.iter().zip(&classes) {
            objective.add_expr(&cv.arrivals[n], w * tc.startup_cost);
            objective.add_expr(&cv.up[n], w * dt * tc.no_load_cost);
            objective.add(cv.power[n], w * dt * tc.marginal_cost);
            balance.add(cv.power[n], 1.0);
            inertia.add_expr(&cv.up[n], tc.unit_inertia());
            if let Some(r) = cv.pfr[n] {
                pfr_total.add(r, 1.0);
            }
        }
        for sv in &storage {
            balance.add(sv.discharge[n], 1.0).add(sv.charge[n], -1.0);
        }
        balance.add(wind_used[n], 1.0).add(shed[n], 1.0).add(spill[n], -1.0);
        objective.add(shed[n], w * dt * model.voll);
        p.add_row(format!("balance_{n}"), balance, Sense::Eq, nd.demand);

        if secured {
            p.add_row(format!("rocof_{n}"), inertia.clone(), Sense::Ge, min_inertia_for_rocof(fp));
            let mut qss = pfr_total.clone();
            qss.add_expr(&efr_total, 1.0);
            p.add_row(format!("qss_{n}"), qss, Sense::Ge, fp.largest_loss);
            let mut x = inertia.scaled(1.0 / fp.f0);
            x.add_expr(&efr_total, -fp.t_efr / (4.0 * fp.delta_f_max));
            let zs = (fp.t_pfr / (4.0 * fp.delta_f_max)).sqrt();
            let mut z = LinExpr::constant(fp.largest_loss * zs);
            z.add_expr(&efr_total, -zs);
            p.add_cone(format!("nadir_{n}"), x, pfr_total.clone(), z);
        } else if unlinked {
            if let Some(req) = opts.fixed_pfr_requirement {
                p.add_row(format!("pfr_req_{n}"), pfr_total.clone(), Sense::Ge, req);
            }
            if let Some(floor) = opts.inertia_floor {
                p.add_row(format!("inertia_floor_{n}"), inertia.clone(), Sense::Ge, floor);
            }
        }
    }
    p.set_objective(objective);

    Ok(SucProblem {
        problem: p,
        classes,
        storage,
        wind_used,
        wind_available: nodes.iter().map(|n| n.wind_available).collect(),
        shed,
        spill,
    })
}

impl SucProblem {
    pub fn decode_node(&self, sol: &Solution, n: usize) -> NodeDecision {
        let v = |x: Var| sol.value(x);
        NodeDecision {
            classes: self
                .classes
                .iter()
                .map(|cv| ClassDecision {
                    n_up: count(sol.eval(&cv.up[n])),
                    n_sg: count(sol.eval(&cv.arrivals[n])),
                    notified: cv.notify[n].map_or(0, |x| count(v(x))),
                    shutdowns: count(sol.eval(&cv.shutdowns[n])),
                    power: v(cv.power[n]),
                    pfr: cv.pfr[n].map_or(0.0, v),
                })
                .collect(),
            storage: self
                .storage
                .iter()
                .map(|sv| StorageDecision {
                    charge: v(sv.charge[n]),
                    discharge: v(sv.discharge[n]),
                    soc: v(sv.soc[n]),
                    efr: v(sv.efr),
                })
                .collect(),
            wind_used: v(self.wind_used[n]),
            wind_curtailed: (self.wind_available[n] - v(self.wind_used[n])).max(0.0),
            load_shed: v(self.shed[n]),
            spill: v(self.spill[n]),
        }
    }

    pub fn decode(&self, sol: &Solution) -> Vec<NodeDecision> {
        (0..self.wind_used.len()).map(|n| self.decode_node(sol, n)).collect()
    }

    /// Arrivals for depths `0..startup_time` per class, as used by the solve.
    pub fn pending(&self, sol: &Solution) -> Vec<Vec<u32>> {
        self.classes
            .iter()
            .map(|cv| cv.pending.iter().map(|e| count(sol.eval(e))).collect())
            .collect()
    }

    pub fn root_plan(&self, sol: &Solution) -> RootPlan {
        RootPlan {
            decision: self.decode_node(sol, 0),
            pending: self.pending(sol),
        }
    }
}
