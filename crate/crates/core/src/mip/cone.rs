use super::problem::{ConeRow, LinExpr};

/// Linear cut `expr ≤ rhs` over the problem variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub cone: usize,
    pub expr: LinExpr,
    pub rhs: f64,
}

impl Cut {
    pub fn violation(&self, values: &[f64]) -> f64 {
        self.expr.eval(values) - self.rhs
    }
}

/// Supporting hyperplane of `‖(2z, x − y)‖ ≤ x + y` at the point `values`.
///
/// With `d = x̂ − ŷ` and `r = ‖(2ẑ, d)‖`, the cut is
/// `(d/r − 1)·x − (d/r + 1)·y + (4ẑ/r)·z ≤ 0`, valid for the whole cone by
/// Cauchy-Schwarz. At the apex direction (`r = 0`) it degenerates to
/// `x + y ≥ 0`.
pub fn cone_cut(idx: usize, cone: &ConeRow, values: &[f64]) -> Cut {
    let (x, y, z) = (cone.x.eval(values), cone.y.eval(values), cone.z.eval(values));
    let d = x - y;
    let r = (4.0 * z * z + d * d).sqrt();
    let (ax, ay, az) = if r > 0.0 {
        (d / r - 1.0, -d / r - 1.0, 4.0 * z / r)
    } else {
        (-1.0, -1.0, 0.0)
    };
    let mut e = LinExpr::new();
    e.add_expr(&cone.x, ax).add_expr(&cone.y, ay).add_expr(&cone.z, az);
    let e = e.normalized();
    Cut {
        cone: idx,
        rhs: -e.constant,
        expr: LinExpr {
            terms: e.terms,
            constant: 0.0,
        },
    }
}
