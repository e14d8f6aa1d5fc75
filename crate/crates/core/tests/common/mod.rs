//! Shared oracles for the integration tests.
#![allow(dead_code)]

use fsuc_core::mip::{LinExpr, MipProblem, Sense, Var};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct TinyUnit {
    pub count: u32,
    pub pmin: f64,
    pub pmax: f64,
    pub marginal: f64,
    pub no_load: f64,
    pub startup: f64,
    pub inertia: f64,
    pub response: f64,
}

/// A clustered UC small enough to enumerate: integer online counts and
/// start counts per unit type and period, continuous dispatch, shedding at
/// `voll` and free spill. With `security` set, every period must satisfy
/// `(Σ inertia·n)·(Σ response·n) ≥ security²`, which is a cone row over
/// integers only.
#[derive(Debug, Clone)]
pub struct TinyUc {
    pub units: Vec<TinyUnit>,
    pub demand: Vec<f64>,
    pub initial: Vec<u32>,
    pub voll: f64,
    pub security: Option<f64>,
}

pub fn random_tiny_uc<R: Rng>(rng: &mut R, with_cone: bool) -> TinyUc {
    let n_units = rng.random_range(1..=2);
    let periods = if n_units == 1 { rng.random_range(1..=6) } else { rng.random_range(1..=3) };
    let units: Vec<TinyUnit> = (0..n_units)
        .map(|_| {
            let pmax = rng.random_range(50.0..400.0);
            TinyUnit {
                count: rng.random_range(1..=3),
                pmin: pmax * rng.random_range(0.0..0.6),
                pmax,
                marginal: rng.random_range(10.0..80.0),
                no_load: rng.random_range(0.0..3000.0),
                startup: rng.random_range(0.0..20000.0),
                inertia: rng.random_range(500.0..3000.0),
                response: rng.random_range(10.0..100.0),
            }
        })
        .collect();
    let cap: f64 = units.iter().map(|u| u.pmax * f64::from(u.count)).sum();
    let demand = (0..periods).map(|_| rng.random_range(0.1..1.1) * cap).collect();
    let initial = units.iter().map(|u| rng.random_range(0..=u.count)).collect();
    let security = with_cone.then(|| {
        let full_h: f64 = units.iter().map(|u| u.inertia * f64::from(u.count)).sum();
        let full_r: f64 = units.iter().map(|u| u.response * f64::from(u.count)).sum();
        (full_h * full_r).sqrt() * rng.random_range(0.1..0.8)
    });
    TinyUc {
        units,
        demand,
        initial,
        voll: 3000.0,
        security,
    }
}

pub struct TinyModel {
    pub problem: MipProblem,
    pub online: Vec<Vec<Var>>,
}

impl TinyUc {
    pub fn to_mip(&self) -> TinyModel {
        let mut p = MipProblem::new();
        let mut obj = LinExpr::new();
        let mut online = Vec::new();
        for (t, &d) in self.demand.iter().enumerate() {
            let mut balance = LinExpr::new();
            let mut row = Vec::new();
            let (mut x, mut y) = (LinExpr::new(), LinExpr::new());
            for (g, u) in self.units.iter().enumerate() {
                let hi = f64::from(u.count);
                let n = p.add_var(format!("n{g}_{t}"), 0.0, hi, true);
                let s = p.add_var(format!("s{g}_{t}"), 0.0, hi, true);
                let pw = p.add_var(format!("p{g}_{t}"), 0.0, u.pmax * hi, false);
                p.add_row("pmin", LinExpr::term(pw, 1.0).with(n, -u.pmin), Sense::Ge, 0.0);
                p.add_row("pmax", LinExpr::term(pw, 1.0).with(n, -u.pmax), Sense::Le, 0.0);
                let mut start = LinExpr::term(s, 1.0).with(n, -1.0);
                match online.last() {
                    Some(prev) => {
                        let prev: &Vec<Var> = prev;
                        start.add(prev[g], 1.0);
                        p.add_row("start", start, Sense::Ge, 0.0);
                    }
                    None => p.add_row("start", start, Sense::Ge, -f64::from(self.initial[g])),
                }
                obj.add(pw, u.marginal).add(n, u.no_load).add(s, u.startup);
                balance.add(pw, 1.0);
                x.add(n, u.inertia);
                y.add(n, u.response);
                row.push(n);
            }
            let shed = p.add_var(format!("shed{t}"), 0.0, d, false);
            let spill = p.add_var(format!("spill{t}"), 0.0, f64::INFINITY, false);
            balance.add(shed, 1.0).add(spill, -1.0);
            p.add_row("balance", balance, Sense::Eq, d);
            obj.add(shed, self.voll);
            if let Some(z) = self.security {
                p.add_cone("security", x, y, LinExpr::constant(z));
            }
            online.push(row);
        }
        p.set_objective(obj);
        TinyModel { problem: p, online }
    }

    /// Exhaustive search over online counts with a merit-order dispatch per
    /// period. `None` if no commitment satisfies the security row.
    pub fn brute_force(&self) -> Option<f64> {
        let periods = self.demand.len();
        let g = self.units.len();
        let radix: Vec<u32> = self.units.iter().map(|u| u.count + 1).collect();
        let combos: u64 = radix.iter().map(|&r| u64::from(r)).product::<u64>().pow(periods as u32);
        let mut best: Option<f64> = None;
        let mut n = vec![vec![0u32; g]; periods];
        for mut code in 0..combos {
            for row in n.iter_mut() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = (code % u64::from(radix[k])) as u32;
                    code /= u64::from(radix[k]);
                }
            }
            if let Some(c) = self.commitment_cost(&n) {
                best = Some(best.map_or(c, |b: f64| b.min(c)));
            }
        }
        best
    }

    fn commitment_cost(&self, n: &[Vec<u32>]) -> Option<f64> {
        let mut cost = 0.0;
        let mut prev = self.initial.clone();
        for (t, row) in n.iter().enumerate() {
            if let Some(z) = self.security {
                let h: f64 = row.iter().zip(&self.units).map(|(&k, u)| u.inertia * f64::from(k)).sum();
                let r: f64 = row.iter().zip(&self.units).map(|(&k, u)| u.response * f64::from(k)).sum();
                if h * r < z * z {
                    return None;
                }
            }
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| self.units[a].marginal.total_cmp(&self.units[b].marginal));
            let mut served = 0.0;
            for (k, u) in self.units.iter().enumerate() {
                let m = f64::from(row[k]);
                cost += u.no_load * m + u.startup * f64::from(row[k].saturating_sub(prev[k]));
                cost += u.marginal * u.pmin * m;
                served += u.pmin * m;
            }
            let mut rest = (self.demand[t] - served).max(0.0);
            for &k in &order {
                let u = &self.units[k];
                let room = (u.pmax - u.pmin) * f64::from(row[k]);
                let take = rest.min(room);
                cost += u.marginal * take;
                rest -= take;
            }
            cost += self.voll * rest;
            prev = row.clone();
        }
        Some(cost)
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
