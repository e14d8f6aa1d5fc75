mod common;

use std::io::Write;
use std::process::{Command, Stdio};

use fsuc_core::mip::{export_interchange, solve, MipProblem, SolveOptions, SolveStatus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_tiny_uc, rel_diff};

fn tiny(seed: u64, cone: bool) -> common::TinyUc {
    random_tiny_uc(&mut ChaCha8Rng::seed_from_u64(seed), cone)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_enumeration(seed in any::<u64>(), cone in any::<bool>()) {
        let uc = tiny(seed, cone);
        let m = uc.to_mip();
        let sol = solve(&m.problem, &SolveOptions::exact()).unwrap();
        match uc.brute_force() {
            Some(best) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                prop_assert!(rel_diff(best, sol.objective) <= 1e-6, "{} vs {}", sol.objective, best);
            }
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn solution_is_feasible_and_priced(seed in any::<u64>()) {
        let m = tiny(seed, true).to_mip();
        let sol = solve(&m.problem, &SolveOptions::default()).unwrap();
        if sol.has_solution() {
            prop_assert!(m.problem.max_violation(&sol.values) <= 1e-6);
            let recomputed = m.problem.objective_value(&sol.values);
            prop_assert!(rel_diff(recomputed, sol.objective) <= 1e-9);
            prop_assert!(sol.best_bound <= sol.objective + 1e-6 * sol.objective.abs().max(1.0));
        }
    }

    #[test]
    fn incumbents_only_improve(seed in any::<u64>()) {
        let m = tiny(seed, true).to_mip();
        let sol = solve(&m.problem, &SolveOptions::exact()).unwrap();
        for w in sol.stats.incumbent_trace.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}", sol.stats.incumbent_trace);
        }
        if let Some(&last) = sol.stats.incumbent_trace.last() {
            prop_assert!(rel_diff(last, sol.objective) <= 1e-12);
        }
    }

    #[test]
    fn cuts_never_remove_secure_commitments(seed in any::<u64>()) {
        let uc = tiny(seed, true);
        let m = uc.to_mip();
        let sol = solve(&m.problem, &SolveOptions::exact()).unwrap();
        let z = uc.security.unwrap();
        // every integer commitment that satisfies the cone must satisfy every cut
        let radix: Vec<u32> = uc.units.iter().map(|u| u.count + 1).collect();
        let combos: u32 = radix.iter().product();
        for cut in &sol.stats.cut_log {
            let t = m.problem.cones[cut.cone].name.clone();
            prop_assert_eq!(t, "security");
            let period = cut.cone;
            for mut code in 0..combos {
                let mut values = vec![0.0; m.problem.vars.len()];
                let (mut h, mut r) = (0.0, 0.0);
                for (g, u) in uc.units.iter().enumerate() {
                    let k = code % radix[g];
                    code /= radix[g];
                    values[m.online[period][g].0] = f64::from(k);
                    h += u.inertia * f64::from(k);
                    r += u.response * f64::from(k);
                }
                if h * r >= z * z {
                    prop_assert!(cut.violation(&values) <= 1e-9 * (h + r).max(1.0), "cut {cut:?} removes {values:?}");
                }
            }
        }
    }

    #[test]
    fn repeated_solves_agree(seed in any::<u64>()) {
        let m = tiny(seed, true).to_mip();
        let a = solve(&m.problem, &SolveOptions::default()).unwrap();
        let b = solve(&m.problem, &SolveOptions::default()).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.values, b.values);
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        prop_assert_eq!(a.stats.nodes, b.stats.nodes);
        prop_assert_eq!(a.stats.cut_log, b.stats.cut_log);
    }
}

const HIGHS_SCRIPT: &str = r#"
import sys
import numpy as np
from scipy.optimize import milp, LinearConstraint, Bounds

rows, cols, order, obj_row = {}, {}, [], None
entries, rhs, lo, hi, integer = [], {}, {}, {}, set()
section, in_int = None, False
for line in sys.stdin:
    if not line.strip() or line.startswith("*"):
        continue
    if not line[0].isspace():
        section = line.split()[0]
        continue
    f = line.split()
    if section == "ROWS":
        if f[0] == "N":
            obj_row = f[1]
        else:
            rows[f[1]] = f[0]
            order.append(f[1])
    elif section == "COLUMNS":
        if f[1] == "'MARKER'":
            in_int = f[2] == "'INTORG'"
            continue
        if f[0] not in cols:
            cols[f[0]] = len(cols)
        if in_int:
            integer.add(f[0])
        for k in range(1, len(f), 2):
            entries.append((f[k], f[0], float(f[k + 1])))
    elif section == "RHS":
        for k in range(1, len(f), 2):
            rhs[f[k]] = float(f[k + 1])
    elif section == "BOUNDS":
        kind, c = f[0], f[2]
        v = float(f[3]) if len(f) > 3 else 0.0
        if kind in ("UP", "UI"): hi[c] = v
        elif kind in ("LO", "LI"): lo[c] = v
        elif kind == "FX": lo[c] = hi[c] = v
        elif kind == "FR": lo[c] = -np.inf
        elif kind == "MI": lo[c] = -np.inf
        elif kind == "BV": lo[c], hi[c] = 0.0, 1.0; integer.add(c)

n = len(cols)
c = np.zeros(n)
A = np.zeros((len(order), n))
ridx = {r: i for i, r in enumerate(order)}
for r, col, v in entries:
    if r == obj_row:
        c[cols[col]] += v
    else:
        A[ridx[r], cols[col]] += v
lb_r, ub_r = [], []
for r in order:
    b = rhs.get(r, 0.0)
    s = rows[r]
    lb_r.append(b if s in ("G", "E") else -np.inf)
    ub_r.append(b if s in ("L", "E") else np.inf)
names = sorted(cols, key=cols.get)
lb = [lo.get(k, 0.0) for k in names]
ub = [hi.get(k, np.inf) for k in names]
integ = [1 if k in integer else 0 for k in names]
res = milp(c, constraints=LinearConstraint(A, lb_r, ub_r), integrality=integ, bounds=Bounds(lb, ub),
           options={"mip_rel_gap": 0.0})
print("infeasible" if res.status == 2 else repr(res.fun))
"#;

fn highs(mps: &str) -> Option<String> {
    let mut child = Command::new("python3")
        .args(["-c", HIGHS_SCRIPT])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    child.stdin.take()?.write_all(mps.as_bytes()).ok()?;
    let out = child.wait_with_output().ok()?;
    out.status.success().then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn cone_free(seed: u64) -> (MipProblem, f64) {
    let m = tiny(seed, false).to_mip();
    let sol = solve(&m.problem, &SolveOptions::exact()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    (m.problem, sol.objective)
}

/// Exports linear instances and re-solves the MPS text with HiGHS through
/// scipy. Skipped when python3 or scipy is missing.
#[test]
fn exported_mps_solves_to_same_objective() {
    let scipy = Command::new("python3").args(["-c", "import scipy.optimize"]).stderr(Stdio::null()).status();
    if !scipy.is_ok_and(|s| s.success()) {
        eprintln!("python3 with scipy unavailable, skipping");
        return;
    }
    for seed in 0..10 {
        let (p, ours) = cone_free(seed);
        let theirs: f64 = highs(&export_interchange(&p).mps).unwrap().parse().unwrap();
        assert!(rel_diff(ours, theirs) <= 1e-6, "seed {seed}: {ours} vs {theirs}");
    }
}

#[test]
fn node_limit_without_incumbent_reports_limit() {
    let m = tiny(3, true).to_mip();
    let opts = SolveOptions {
        node_limit: Some(0),
        ..SolveOptions::exact()
    };
    let sol = solve(&m.problem, &opts).unwrap();
    match sol.status {
        SolveStatus::Optimal | SolveStatus::FeasibleGap => assert!(sol.has_solution()),
        SolveStatus::Limit => assert!(sol.values.is_empty() || m.problem.max_violation(&sol.values) <= 1e-6),
        SolveStatus::Infeasible => assert!(tiny(3, true).brute_force().is_none()),
        SolveStatus::Unbounded => panic!("bounded instance reported unbounded"),
    }
}
