use std::fmt;

use super::SolverError;

/// Index of a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

/// Affine expression `Σ coef·var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(v: Var, coef: f64) -> Self {
        LinExpr {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    pub fn add(&mut self, v: Var, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        self.terms
            .extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
        self.constant += other.constant * scale;
        self
    }

    pub fn with(mut self, v: Var, coef: f64) -> Self {
        self.add(v, coef);
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut e = LinExpr::new();
        e.add_expr(self, s);
        e
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }

    /// Merges repeated variables and drops zero coefficients, keeping the
    /// order of first appearance.
    pub fn normalized(&self) -> LinExpr {
        let mut out: Vec<(Var, f64)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in &self.terms {
            match out.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += c,
                None => out.push((v, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        LinExpr {
            terms: out,
            constant: self.constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDef {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
}

/// `expr (sense) rhs`, with any constant of the original expression folded
/// into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

/// Rotated second-order cone `x·y ≥ z²` with `x, y ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeRow {
    pub name: String,
    pub x: LinExpr,
    pub y: LinExpr,
    pub z: LinExpr,
}

impl ConeRow {
    /// Residual of the equivalent form `‖(2z, x − y)‖ ≤ x + y`; positive
    /// means violated.
    pub fn residual(&self, values: &[f64]) -> f64 {
        let (x, y, z) = (self.x.eval(values), self.y.eval(values), self.z.eval(values));
        (4.0 * z * z + (x - y) * (x - y)).sqrt() - (x + y)
    }

    /// Scale used to make the residual relative.
    pub fn magnitude(&self, values: &[f64]) -> f64 {
        let (x, y, z) = (self.x.eval(values), self.y.eval(values), self.z.eval(values));
        1.0_f64.max(x.abs() + y.abs() + 2.0 * z.abs())
    }
}

/// Minimization problem with linear rows and rotated-cone rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MipProblem {
    pub vars: Vec<VarDef>,
    pub rows: Vec<LinearRow>,
    pub cones: Vec<ConeRow>,
    pub objective: LinExpr,
}

impl MipProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, integer: bool) -> Var {
        self.vars.push(VarDef {
            name: name.into(),
            lo,
            hi,
            integer,
        });
        Var(self.vars.len() - 1)
    }

    pub fn add_row(&mut self, name: impl Into<String>, expr: LinExpr, sense: Sense, rhs: f64) {
        let expr = expr.normalized();
        let rhs = rhs - expr.constant;
        self.rows.push(LinearRow {
            name: name.into(),
            expr: LinExpr {
                terms: expr.terms,
                constant: 0.0,
            },
            sense,
            rhs,
        });
    }

    pub fn add_cone(&mut self, name: impl Into<String>, x: LinExpr, y: LinExpr, z: LinExpr) {
        self.cones.push(ConeRow {
            name: name.into(),
            x: x.normalized(),
            y: y.normalized(),
            z: z.normalized(),
        });
    }

    pub fn set_objective(&mut self, obj: LinExpr) {
        self.objective = obj.normalized();
    }

    pub fn num_integers(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.vars.len();
        for (i, v) in self.vars.iter().enumerate() {
            if v.lo.is_nan() || v.hi.is_nan() || v.lo > v.hi {
                return Err(SolverError::Malformed(format!(
                    "variable {i} ({}) has bounds [{}, {}]",
                    v.name, v.lo, v.hi
                )));
            }
        }
        let check_expr = |what: &str, e: &LinExpr| -> Result<(), SolverError> {
            if !e.constant.is_finite() {
                return Err(SolverError::Malformed(format!("{what}: non-finite constant")));
            }
            for &(v, c) in &e.terms {
                if v.0 >= n {
                    return Err(SolverError::Malformed(format!(
                        "{what}: references undeclared variable {}",
                        v.0
                    )));
                }
                if !c.is_finite() {
                    return Err(SolverError::Malformed(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check_expr("objective", &self.objective)?;
        for r in &self.rows {
            check_expr(&r.name, &r.expr)?;
            if !r.rhs.is_finite() {
                return Err(SolverError::Malformed(format!("{}: non-finite rhs", r.name)));
            }
        }
        for c in &self.cones {
            check_expr(&c.name, &c.x)?;
            check_expr(&c.name, &c.y)?;
            check_expr(&c.name, &c.z)?;
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    /// Largest violation over bounds, integrality, linear rows and cones
    /// (cones measured relative to their magnitude). Zero when feasible.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lo - x).max(x - v.hi);
            if v.integer {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for r in &self.rows {
            let lhs = r.expr.eval(values);
            let viol = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol / 1.0_f64.max(r.rhs.abs()));
        }
        for c in &self.cones {
            worst = worst.max(c.residual(values) / c.magnitude(values));
        }
        worst
    }
}
