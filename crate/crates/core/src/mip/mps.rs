//! Fixed-format MPS export.
//!
//! Columns are named `C0000000…`, rows `R0000000…`; original names go in
//! comment lines. Each cone gets three free auxiliary columns tied to its
//! affine x, y and z by equality rows, so the sidecar can list plain column
//! triples.

use std::fmt::Write;

use super::problem::{LinExpr, MipProblem, Sense};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interchange {
    pub mps: String,
    /// One line per cone: `name x_col y_col z_col`, meaning `x·y ≥ z²`.
    pub sidecar: String,
}

/// Shortest rendering of `x` that fits a 12-character MPS number field.
fn num(x: f64) -> String {
    let s = format!("{x}");
    if s.len() <= 12 {
        return s;
    }
    let mut best: Option<(f64, String)> = None;
    for prec in 0..=11 {
        for cand in [format!("{x:.prec$e}"), format!("{x:.prec$}")] {
            if cand.len() > 12 {
                continue;
            }
            let err = (cand.parse::<f64>().unwrap_or(f64::INFINITY) - x).abs();
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, cand));
            }
        }
    }
    best.map(|(_, s)| s).unwrap_or(s)
}

fn col(j: usize) -> String {
    format!("C{j:07}")
}

fn row(i: usize) -> String {
    format!("R{i:07}")
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

struct Row {
    sense: char,
    expr: LinExpr,
    rhs: f64,
}

pub fn export_interchange(p: &MipProblem) -> Interchange {
    let n = p.vars.len();
    let mut rows: Vec<Row> = p
        .rows
        .iter()
        .map(|r| Row {
            sense: match r.sense {
                Sense::Le => 'L',
                Sense::Ge => 'G',
                Sense::Eq => 'E',
            },
            expr: r.expr.clone(),
            rhs: r.rhs,
        })
        .collect();
    let mut sidecar = String::from("# rotated cones x*y >= z^2, x,y >= 0\n");
    for (k, c) in p.cones.iter().enumerate() {
        let mut cols = Vec::new();
        for (a, e) in [&c.x, &c.y, &c.z].into_iter().enumerate() {
            let j = n + 3 * k + a;
            // aux − expr = constant
            let mut def = LinExpr::term(super::Var(j), 1.0);
            def.add_expr(&LinExpr { terms: e.terms.clone(), constant: 0.0 }, -1.0);
            rows.push(Row {
                sense: 'E',
                expr: def.normalized(),
                rhs: e.constant,
            });
            cols.push(col(j));
        }
        writeln!(sidecar, "{} {} {} {}", sanitize(&c.name), cols[0], cols[1], cols[2]).unwrap();
    }
    let total_cols = n + 3 * p.cones.len();

    // column-major coefficients
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total_cols];
    for (i, r) in rows.iter().enumerate() {
        for &(v, c) in &r.expr.terms {
            by_col[v.0].push((i + 1, c));
        }
    }
    let mut obj = vec![0.0; total_cols];
    for &(v, c) in &p.objective.terms {
        obj[v.0] += c;
    }

    let mut out = String::new();
    out.push_str("* fsuc interchange export\n");
    writeln!(out, "* objective constant {}", p.objective.constant).unwrap();
    for (j, v) in p.vars.iter().enumerate() {
        writeln!(out, "* column {} {}", col(j), sanitize(&v.name)).unwrap();
    }
    for (i, r) in p.rows.iter().enumerate() {
        writeln!(out, "* row {} {}", row(i + 1), sanitize(&r.name)).unwrap();
    }
    for (k, c) in p.cones.iter().enumerate() {
        writeln!(
            out,
            "* CONE {} RQUAD {} {} {}",
            sanitize(&c.name),
            col(n + 3 * k),
            col(n + 3 * k + 1),
            col(n + 3 * k + 2)
        )
        .unwrap();
    }
    out.push_str("NAME          FSUC\n");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, " {}  {}", r.sense, row(i + 1)).unwrap();
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for j in 0..total_cols {
        let is_int = j < n && p.vars[j].integer;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    M{marker:07}  'MARKER'                 {tag}").unwrap();
            marker += 1;
            in_int = is_int;
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        if obj[j] != 0.0 {
            entries.push(("COST".into(), obj[j]));
        }
        entries.extend(by_col[j].iter().map(|&(i, c)| (row(i), c)));
        if entries.is_empty() {
            // keep the column declared
            entries.push(("COST".into(), 0.0));
        }
        for (name, c) in entries {
            writeln!(out, "    {:<8}  {:<8}  {:>12}", col(j), name, num(c)).unwrap();
        }
    }
    if in_int {
        writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'").unwrap();
    }
    out.push_str("RHS\n");
    for (i, r) in rows.iter().enumerate() {
        if r.rhs != 0.0 {
            writeln!(out, "    RHS       {:<8}  {:>12}", row(i + 1), num(r.rhs)).unwrap();
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..total_cols {
        let (lo, hi) = if j < n {
            (p.vars[j].lo, p.vars[j].hi)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        let c = col(j);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => {
                writeln!(out, " FX BND       {c:<8}  {:>12}", num(lo)).unwrap()
            }
            (false, false) => writeln!(out, " FR BND       {c}").unwrap(),
            _ => {
                if lo.is_finite() {
                    if lo != 0.0 {
                        writeln!(out, " LO BND       {c:<8}  {:>12}", num(lo)).unwrap();
                    }
                } else {
                    writeln!(out, " MI BND       {c}").unwrap();
                }
                if hi.is_finite() {
                    writeln!(out, " UP BND       {c:<8}  {:>12}", num(hi)).unwrap();
                } else if j < n && p.vars[j].integer {
                    // integer markers default some readers to binary
                    writeln!(out, " PL BND       {c}").unwrap();
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Interchange { mps: out, sidecar }
}
