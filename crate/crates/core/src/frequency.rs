//! Post-fault frequency security.
//!
//! After the loss of `P_L` MW, the aggregate swing equation
//!
//! ```text
//! 2H/f0 · dΔf/dt = EFR(t) + PFR(t) − P_L
//! ```
//!
//! is driven by two ramped responses: EFR reaches its full volume at
//! `T_EFR`, PFR at `T_PFR`. Deviations are negative during the drop and all
//! limits compare magnitudes. `H` is post-fault inertia in MW·s.
//!
//! The closed forms here (RoCoF floor, nadir condition, quasi-steady-state
//! condition, nadir value) are checked against [`simulate_post_fault`], which
//! integrates the swing equation numerically and shares none of the algebra.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::FrequencyParams;

/// Frequency services available when the contingency occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServicePoint {
    /// MW·s, excluding the lost unit.
    pub inertia: f64,
    /// MW of EFR.
    pub efr: f64,
    /// MW of PFR.
    pub pfr: f64,
}

impl ServicePoint {
    pub fn new(inertia: f64, efr: f64, pfr: f64) -> Self {
        ServicePoint { inertia, efr, pfr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrajectory {
    /// s
    pub times: Vec<f64>,
    /// Hz, negative while frequency is below nominal.
    pub deviations: Vec<f64>,
    /// Largest sampled drop below nominal, Hz (a magnitude).
    pub nadir_dev: f64,
    pub nadir_time: f64,
    /// Hz/s magnitude at t = 0+.
    pub initial_rocof: f64,
    /// Deviation at 60 s.
    pub qss_dev: f64,
}

impl FrequencyTrajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,delta_f")?;
        for (t, d) in self.times.iter().zip(&self.deviations) {
            writeln!(w, "{t},{d}")?;
        }
        Ok(())
    }
}

/// Inertia needed to keep the initial RoCoF within its limit:
/// `P_L·f0 / (2·RoCoF_max)`.
pub fn min_inertia_for_rocof(fp: &FrequencyParams) -> f64 {
    fp.largest_loss * fp.f0 / (2.0 * fp.rocof_max)
}

/// RoCoF magnitude immediately after the loss, `f0·P_L / (2H)`.
pub fn initial_rocof(inertia: f64, fp: &FrequencyParams) -> f64 {
    fp.f0 * fp.largest_loss / (2.0 * inertia)
}

/// Left-hand factor and right-hand side of the nadir condition
/// `factor · PFR ≥ rhs`.
fn nadir_terms(inertia: f64, efr: f64, fp: &FrequencyParams) -> (f64, f64) {
    let factor = inertia / fp.f0 - efr * fp.t_efr / (4.0 * fp.delta_f_max);
    let uncovered = fp.largest_loss - efr;
    let rhs = uncovered * uncovered * fp.t_pfr / (4.0 * fp.delta_f_max);
    (factor, rhs)
}

/// Nadir-condition margin: `(H/f0 − EFR·T_EFR/(4Δf_max))·PFR − (P_L − EFR)²·T_PFR/(4Δf_max)`.
/// Non-negative means the nadir stays within `Δf_max`.
pub fn check_nadir(sp: &ServicePoint, fp: &FrequencyParams) -> f64 {
    let (factor, rhs) = nadir_terms(sp.inertia, sp.efr, fp);
    factor * sp.pfr - rhs
}

/// Smallest PFR volume that satisfies the nadir condition at the given
/// inertia and EFR. Zero once EFR alone covers the loss.
pub fn min_pfr_for_nadir(inertia: f64, efr: f64, fp: &FrequencyParams) -> Result<f64> {
    if efr >= fp.largest_loss {
        return Ok(0.0);
    }
    let (factor, rhs) = nadir_terms(inertia, efr, fp);
    if factor <= 0.0 {
        return Err(Error::InfeasibleInertia { inertia, efr });
    }
    let mut pfr = rhs / factor;
    // land on the feasible side of the rounding
    while factor * pfr - rhs < 0.0 {
        pfr = pfr.next_up();
    }
    Ok(pfr)
}

/// Quasi-steady-state condition: total response covers the loss.
pub fn check_qss(efr: f64, pfr: f64, p_l: f64) -> bool {
    efr + pfr >= p_l
}

/// Closed-form nadir magnitude (Hz) and the instant it occurs (s).
pub fn analytic_nadir_point(sp: &ServicePoint, fp: &FrequencyParams) -> Result<(f64, f64)> {
    if sp.inertia.is_nan() || sp.inertia <= 0.0 {
        return Err(Error::Precondition(format!(
            "inertia must be > 0, got {}",
            sp.inertia
        )));
    }
    let p_l = fp.largest_loss;
    if p_l == 0.0 {
        return Ok((0.0, 0.0));
    }
    if !check_qss(sp.efr, sp.pfr, p_l) {
        return Err(Error::NoNadir {
            efr: sp.efr,
            pfr: sp.pfr,
            loss: p_l,
        });
    }
    let scale = fp.f0 / (2.0 * sp.inertia);
    if sp.efr + sp.pfr * fp.t_efr / fp.t_pfr >= p_l {
        // both services still ramping when they cover the loss
        let slope = sp.efr / fp.t_efr + sp.pfr / fp.t_pfr;
        let t_star = p_l / slope;
        Ok((scale * p_l * t_star / 2.0, t_star))
    } else {
        let uncovered = p_l - sp.efr;
        let t_star = uncovered * fp.t_pfr / sp.pfr;
        let dev = scale
            * (sp.efr * fp.t_efr / 2.0 + uncovered * uncovered * fp.t_pfr / (2.0 * sp.pfr));
        Ok((dev, t_star))
    }
}

/// Closed-form nadir magnitude in Hz.
pub fn analytic_nadir(sp: &ServicePoint, fp: &FrequencyParams) -> Result<f64> {
    analytic_nadir_point(sp, fp).map(|(dev, _)| dev)
}

fn ramp(volume: f64, ramp_time: f64, t: f64) -> f64 {
    if t <= ramp_time {
        volume * t / ramp_time
    } else {
        volume
    }
}

/// Integrates the swing equation from Δf(0) = 0 on a fixed grid of step
/// `dt`, with the ramp end points and the instant the net power imbalance
/// changes sign inserted as extra samples. Each step uses RK4, which is exact
/// on the piecewise-linear forcing between breakpoints.
pub fn simulate_post_fault(
    sp: &ServicePoint,
    fp: &FrequencyParams,
    dt: f64,
    t_end: f64,
) -> Result<FrequencyTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= 60.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("t_end must be >= 60 s, got {t_end}")));
    }
    if !(sp.inertia > 0.0 && sp.inertia.is_finite()) {
        return Err(Error::Precondition(format!(
            "inertia must be > 0, got {}",
            sp.inertia
        )));
    }
    if !(sp.efr >= 0.0 && sp.pfr >= 0.0) {
        return Err(Error::Precondition("service volumes must be >= 0".into()));
    }

    let gain = fp.f0 / (2.0 * sp.inertia);
    let net = |t: f64| ramp(sp.efr, fp.t_efr, t) + ramp(sp.pfr, fp.t_pfr, t) - fp.largest_loss;
    let deriv = |t: f64| gain * net(t);

    let n_grid = (t_end / dt).round() as usize;
    let mut knots: Vec<f64> = (0..=n_grid).map(|k| (k as f64 * dt).min(t_end)).collect();
    for b in [fp.t_efr, fp.t_pfr, 60.0] {
        if b > 0.0 && b < t_end {
            knots.push(b);
        }
    }
    knots.push(t_end);
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut times = Vec::with_capacity(knots.len() + 1);
    let mut deviations = Vec::with_capacity(knots.len() + 1);
    let mut t = 0.0;
    let mut y = 0.0;
    times.push(t);
    deviations.push(y);
    // the forcing does not depend on Δf, so k2 == k3
    let rk4 = |t0: f64, y0: f64, h: f64| {
        let k1 = deriv(t0);
        let k2 = deriv(t0 + h / 2.0);
        let k4 = deriv(t0 + h);
        y0 + h / 6.0 * (k1 + 4.0 * k2 + k4)
    };
    for &next in &knots[1..] {
        let (n0, n1) = (net(t), net(next));
        if n0 < 0.0 && n1 > 0.0 {
            // linear between knots, so the crossing is exact
            let tc = t - n0 * (next - t) / (n1 - n0);
            if tc > t && tc < next {
                y = rk4(t, y, tc - t);
                t = tc;
                times.push(t);
                deviations.push(y);
            }
        }
        y = rk4(t, y, next - t);
        t = next;
        times.push(t);
        deviations.push(y);
    }

    let (mut nadir_dev, mut nadir_time) = (0.0_f64, 0.0);
    for (&ti, &d) in times.iter().zip(&deviations) {
        if -d > nadir_dev {
            nadir_dev = -d;
            nadir_time = ti;
        }
    }
    let qss_idx = times
        .iter()
        .position(|&ti| (ti - 60.0).abs() < 1e-9)
        .expect("60 s is always a knot");
    Ok(FrequencyTrajectory {
        qss_dev: deviations[qss_idx],
        times,
        deviations,
        nadir_dev,
        nadir_time,
        initial_rocof: initial_rocof(sp.inertia, fp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gb(loss: f64) -> FrequencyParams {
        FrequencyParams::gb(loss)
    }

    #[test]
    fn rocof_floor() {
        assert_eq!(min_inertia_for_rocof(&gb(1800.0)), 90_000.0);
        assert_eq!(min_inertia_for_rocof(&gb(1320.0)), 66_000.0);
        assert_eq!(min_inertia_for_rocof(&gb(0.0)), 0.0);
    }

    #[test]
    fn nadir_margin_cases() {
        let fp = gb(1800.0);
        let rhs = 1600.0_f64.powi(2) * 10.0 / 3.2;
        let m = check_nadir(&ServicePoint::new(90_000.0, 200.0, 4604.0), &fp);
        assert!(m.abs() < 1e-3 * rhs, "{m}");
        assert_eq!(check_nadir(&ServicePoint::new(90_000.0, 1800.0, 0.0), &fp), 0.0);
        let m = check_nadir(&ServicePoint::new(230_000.0, 200.0, 1763.0), &fp);
        assert!(m.abs() < 1e-3 * rhs, "{m}");
    }

    #[test]
    fn pfr_requirement() {
        let fp = gb(1800.0);
        let pfr = min_pfr_for_nadir(90_000.0, 200.0, &fp).unwrap();
        assert_relative_eq!(pfr, 8.0e6 / 1737.5, max_relative = 1e-12);
        assert!((pfr - 4604.0).abs() / 4604.0 < 1e-3);
        assert_eq!(min_pfr_for_nadir(90_000.0, 1800.0, &fp).unwrap(), 0.0);
        let pfr = min_pfr_for_nadir(230_000.0, 200.0, &fp).unwrap();
        assert!((pfr - 1763.0).abs() < 1.0, "{pfr}");
    }

    #[test]
    fn pfr_requirement_rejects_vanishing_factor() {
        let fp = gb(1800.0);
        // H/f0 = 10 < 200·1/3.2
        assert!(matches!(
            min_pfr_for_nadir(500.0, 200.0, &fp),
            Err(Error::InfeasibleInertia { .. })
        ));
    }

    #[test]
    fn qss() {
        assert!(check_qss(200.0, 4604.0, 1800.0));
        assert!(check_qss(0.0, 0.0, 0.0));
        assert!(!check_qss(200.0, 1000.0, 1800.0));
    }

    #[test]
    fn analytic_cases() {
        let fp = gb(1800.0);
        let pfr = min_pfr_for_nadir(90_000.0, 200.0, &fp).unwrap();
        let (dev, t_star) = analytic_nadir_point(&ServicePoint::new(90_000.0, 200.0, pfr), &fp).unwrap();
        assert_relative_eq!(dev, 0.8, max_relative = 1e-12);
        assert_relative_eq!(t_star, 1600.0 * 10.0 / pfr, max_relative = 1e-12);
        assert_eq!(analytic_nadir(&ServicePoint::new(90_000.0, 10.0, 0.0), &gb(0.0)).unwrap(), 0.0);
        let dev = analytic_nadir(&ServicePoint::new(90_000.0, 1800.0, 0.0), &fp).unwrap();
        assert_relative_eq!(dev, 0.25, max_relative = 1e-12);
        assert!(matches!(
            analytic_nadir(&ServicePoint::new(90_000.0, 200.0, 1000.0), &fp),
            Err(Error::NoNadir { .. })
        ));
    }

    #[test]
    fn simulated_binding_point() {
        let fp = gb(1800.0);
        let pfr = min_pfr_for_nadir(90_000.0, 200.0, &fp).unwrap();
        let tr = simulate_post_fault(&ServicePoint::new(90_000.0, 200.0, pfr), &fp, 1e-3, 60.0).unwrap();
        assert!((tr.nadir_dev - 0.8).abs() <= 2e-3, "{}", tr.nadir_dev);
        assert!((tr.nadir_time - 3.475).abs() < 0.01, "{}", tr.nadir_time);
        assert_relative_eq!(tr.initial_rocof, 0.5, max_relative = 1e-15);
        assert_eq!(tr.deviations[0], 0.0);
    }

    #[test]
    fn unopposed_loss_keeps_falling() {
        let fp = gb(1800.0);
        let tr = simulate_post_fault(&ServicePoint::new(90_000.0, 0.0, 0.0), &fp, 1e-2, 60.0).unwrap();
        assert!(tr.deviations.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(tr.nadir_time, 60.0);
        assert_relative_eq!(tr.qss_dev, -0.5 * 60.0, max_relative = 1e-9);
    }

    #[test]
    fn simulation_preconditions() {
        let fp = gb(1800.0);
        let sp = ServicePoint::new(90_000.0, 0.0, 0.0);
        assert!(simulate_post_fault(&sp, &fp, 0.0, 60.0).is_err());
        assert!(simulate_post_fault(&sp, &fp, 1e-3, 30.0).is_err());
        assert!(simulate_post_fault(&ServicePoint::new(0.0, 0.0, 0.0), &fp, 1e-3, 60.0).is_err());
    }

    #[test]
    fn trajectory_csv() {
        let fp = gb(100.0);
        let tr = simulate_post_fault(&ServicePoint::new(90_000.0, 0.0, 500.0), &fp, 1.0, 60.0).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,delta_f\n0,0\n"));
        assert_eq!(text.lines().count(), tr.times.len() + 1);
    }
}
