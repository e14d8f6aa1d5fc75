//! Constraint checker for decoded decisions, written against the model data
//! only. It shares no code with the problem builder so that it can audit it.

use crate::frequency::{check_nadir, check_qss, min_inertia_for_rocof, ServicePoint};
use crate::scenario::{CommittedHour, ScenarioTree};
use crate::system::SystemModel;

use super::{system_inertia, FormulationOptions, NodeDecision, PlanState};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: usize,
    pub rule: &'static str,
    pub detail: String,
}

struct Graph<'a> {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    wind: Vec<f64>,
    demand: Vec<f64>,
    interval: Vec<f64>,
    decisions: &'a [NodeDecision],
}

fn tol(scale: f64) -> f64 {
    1e-6 * scale.abs().max(1.0)
}

/// Checks every node of a solved tree. `pending` is the start-up queue the
/// solve used, per class.
pub fn validate_tree(
    model: &SystemModel,
    tree: &ScenarioTree,
    state: &PlanState,
    pending: &[Vec<u32>],
    decisions: &[NodeDecision],
    opts: &FormulationOptions,
) -> Vec<Violation> {
    let g = Graph {
        parent: tree.nodes.iter().map(|n| n.parent).collect(),
        depth: tree.nodes.iter().map(|n| n.depth).collect(),
        wind: tree.nodes.iter().map(|n| n.wind_available).collect(),
        demand: tree.nodes.iter().map(|n| n.demand).collect(),
        interval: tree.nodes.iter().map(|n| n.interval).collect(),
        decisions,
    };
    check(model, &g, state, pending, opts, true)
}

/// Replays a committed hourly schedule from its initial state. EFR may
/// change from hour to hour here.
pub fn validate_schedule(
    model: &SystemModel,
    initial: &PlanState,
    initial_pending: &[Vec<u32>],
    hours: &[CommittedHour],
    opts: &FormulationOptions,
) -> Vec<Violation> {
    let decisions: Vec<NodeDecision> = hours.iter().map(|h| h.decision.clone()).collect();
    let g = Graph {
        parent: (0..hours.len()).map(|i| i.checked_sub(1)).collect(),
        depth: (0..hours.len()).collect(),
        wind: hours.iter().map(|h| h.wind_available).collect(),
        demand: hours.iter().map(|h| h.demand).collect(),
        interval: vec![1.0; hours.len()],
        decisions: &decisions,
    };
    check(model, &g, initial, initial_pending, opts, false)
}

fn check(
    model: &SystemModel,
    g: &Graph<'_>,
    state: &PlanState,
    pending: &[Vec<u32>],
    opts: &FormulationOptions,
    efr_root_stage: bool,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |node: usize, rule: &'static str, detail: String| {
        out.push(Violation { node, rule, detail });
    };
    let fp = &model.freq;
    // ancestors[k] of node n, k = 0 is n
    let lineage = |n: usize| -> Vec<usize> {
        let mut v = vec![n];
        let mut cur = n;
        while let Some(p) = g.parent[cur] {
            v.push(p);
            cur = p;
        }
        v
    };

    for (n, d) in g.decisions.iter().enumerate() {
        let line = lineage(n);
        let depth = g.depth[n];
        let prev = g.parent[n].map(|p| &g.decisions[p]);
        let dt = g.interval[n];

        for (c, (tc, cd)) in model.thermal_classes.iter().zip(&d.classes).enumerate() {
            let cap = tc.unit_count;
            let st = &state.classes[c];
            if cd.n_up > cap {
                flag(n, "n_up_bound", format!("{} has {} > {cap} online", tc.name, cd.n_up));
            }
            if tc.must_run && cd.n_up != cap {
                flag(n, "must_run", format!("{} has {} of {cap} online", tc.name, cd.n_up));
            }
            let n_up = f64::from(cd.n_up);
            if cd.power < tc.min_stable_gen * n_up - tol(cd.power)
                || cd.power > tc.rated_power * n_up + tol(cd.power)
            {
                flag(n, "power_range", format!("{} output {} with {} units", tc.name, cd.power, cd.n_up));
            }
            if cd.pfr < -tol(0.0)
                || cd.pfr > tc.max_response * n_up + tol(cd.pfr)
                || cd.pfr > tc.response_slope * (tc.rated_power * n_up - cd.power) + tol(cd.pfr)
            {
                flag(n, "pfr_capability", format!("{} holds {} MW of PFR", tc.name, cd.pfr));
            }
            if tc.must_run {
                continue;
            }
            let prev_up = prev.map_or(st.online, |p| p.classes[c].n_up);
            if i64::from(cd.n_up) != i64::from(prev_up) + i64::from(cd.n_sg) - i64::from(cd.shutdowns) {
                flag(
                    n,
                    "commitment_balance",
                    format!("{}: {prev_up} + {} - {} != {}", tc.name, cd.n_sg, cd.shutdowns, cd.n_up),
                );
            }
            let lag = tc.startup_time as usize;
            let expected_arrivals = if lag == 0 {
                cd.notified
            } else if depth < lag {
                pending[c].get(depth).copied().unwrap_or(0)
            } else {
                g.decisions[line[lag]].classes[c].notified
            };
            if lag > 0 && cd.n_sg != expected_arrivals {
                flag(
                    n,
                    "startup_lag",
                    format!("{}: {} arrivals but {expected_arrivals} were notified", tc.name, cd.n_sg),
                );
            }
            let hist = |k: usize, own: &dyn Fn(&NodeDecision) -> u32, before: &[u32]| -> u32 {
                match line.get(k) {
                    Some(&a) => own(&g.decisions[a]),
                    None => before.get(k - line.len()).copied().unwrap_or(0),
                }
            };
            let recent_starts: u32 = (0..tc.min_up as usize)
                .map(|k| hist(k, &|x| x.classes[c].n_sg, &st.recent_starts))
                .sum();
            if recent_starts > cd.n_up {
                flag(n, "min_up", format!("{}: {recent_starts} recent starts, {} online", tc.name, cd.n_up));
            }
            let recent_downs: u32 = (0..tc.min_down as usize)
                .map(|k| hist(k, &|x| x.classes[c].shutdowns, &st.recent_shutdowns))
                .sum();
            let mut inflight: u32 = (0..lag)
                .filter_map(|k| line.get(k))
                .map(|&a| g.decisions[a].classes[c].notified)
                .sum();
            if lag > 0 {
                inflight += (depth + 1..lag).map(|k| pending[c].get(k).copied().unwrap_or(0)).sum::<u32>();
            }
            if cd.n_up + recent_downs + inflight > cap {
                flag(
                    n,
                    "min_down",
                    format!(
                        "{}: {} online + {recent_downs} recently down + {inflight} starting > {cap}",
                        tc.name, cd.n_up
                    ),
                );
            }
        }

        for (s, (su, sd)) in model.storage.iter().zip(&d.storage).enumerate() {
            let prev_soc = prev.map_or(state.soc[s], |p| p.storage[s].soc);
            let eta = su.round_trip_eff.sqrt();
            let expect = prev_soc + (eta * sd.charge - sd.discharge / eta) * dt;
            if (sd.soc - expect).abs() > tol(su.energy_cap) {
                flag(n, "soc_continuity", format!("{}: soc {} expected {expect}", su.name, sd.soc));
            }
            if sd.soc < -tol(su.energy_cap) || sd.soc > su.energy_cap + tol(su.energy_cap) {
                flag(n, "soc_bounds", format!("{}: soc {}", su.name, sd.soc));
            }
            let pc = su.power_cap;
            if sd.charge < -tol(pc) || sd.charge > pc + tol(pc) || sd.discharge < -tol(pc) || sd.discharge > pc + tol(pc) {
                flag(n, "storage_power", format!("{}: charge {} discharge {}", su.name, sd.charge, sd.discharge));
            }
            if sd.efr < -tol(pc) || sd.efr > su.efr_capacity + tol(pc) || sd.efr + sd.discharge > pc + tol(pc) {
                flag(n, "efr_capability", format!("{}: efr {} discharge {}", su.name, sd.efr, sd.discharge));
            }
            if efr_root_stage && (sd.efr - g.decisions[0].storage[s].efr).abs() > tol(pc) {
                flag(n, "efr_root_stage", format!("{}: efr differs from root", su.name));
            }
        }

        let supply: f64 = d.classes.iter().map(|c| c.power).sum::<f64>()
            + d.storage.iter().map(|s| s.discharge - s.charge).sum::<f64>()
            + d.wind_used
            + d.load_shed
            - d.spill;
        if (supply - g.demand[n]).abs() > tol(g.demand[n]) {
            flag(n, "power_balance", format!("supply {supply} vs demand {}", g.demand[n]));
        }
        if (d.wind_used + d.wind_curtailed - g.wind[n]).abs() > tol(g.wind[n])
            || d.wind_used < -tol(g.wind[n])
            || d.wind_curtailed < -tol(g.wind[n])
        {
            flag(n, "wind_split", format!("used {} curtailed {} of {}", d.wind_used, d.wind_curtailed, g.wind[n]));
        }
        if d.load_shed < -tol(g.demand[n]) || d.load_shed > g.demand[n] + tol(g.demand[n]) || d.spill < -tol(0.0) {
            flag(n, "shed_spill", format!("shed {} spill {}", d.load_shed, d.spill));
        }

        let inertia = system_inertia(&d.n_up(), &model.thermal_classes, model.loss_class_index());
        let efr = d.total_efr();
        let pfr = d.total_pfr();
        if opts.frequency_constraints && fp.largest_loss > 0.0 {
            let h_min = min_inertia_for_rocof(fp);
            if inertia < h_min - tol(h_min) {
                flag(n, "rocof", format!("inertia {inertia} below {h_min}"));
            }
            if !check_qss(efr, pfr + tol(fp.largest_loss), fp.largest_loss) {
                flag(n, "qss", format!("efr {efr} + pfr {pfr} < {}", fp.largest_loss));
            }
            let sp = ServicePoint::new(inertia, efr, pfr);
            let margin = check_nadir(&sp, fp);
            let scale = (fp.largest_loss - efr).powi(2) * fp.t_pfr / (4.0 * fp.delta_f_max);
            if margin < -1e-5 * scale.max(1.0) {
                flag(n, "nadir", format!("margin {margin} at H {inertia}, EFR {efr}, PFR {pfr}"));
            }
            if let Some(v) = opts.fixed_efr_volume {
                if (efr - v).abs() > tol(v) {
                    flag(n, "efr_volume", format!("efr {efr} vs fixed {v}"));
                }
            }
        } else if opts.is_unlinked() {
            if let Some(req) = opts.fixed_pfr_requirement {
                if pfr < req - tol(req) {
                    flag(n, "pfr_requirement", format!("pfr {pfr} below {req}"));
                }
            }
            if let Some(floor) = opts.inertia_floor {
                if inertia < floor - tol(floor) {
                    flag(n, "inertia_floor", format!("inertia {inertia} below {floor}"));
                }
            }
            if let Some(v) = opts.fixed_efr_volume {
                if (efr - v).abs() > tol(v) {
                    flag(n, "efr_volume", format!("efr {efr} vs fixed {v}"));
                }
            }
        } else if efr > tol(0.0) {
            flag(n, "efr_energy_only", format!("efr {efr} held without frequency rows"));
        }
    }
    out
}
