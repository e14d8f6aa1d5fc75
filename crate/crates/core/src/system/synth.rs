//! Bundled synthetic demand and wind profiles.
//!
//! Demand is a daily sinusoid with a weekend dip, a seasonal factor relative
//! to January and a small autoregressive disturbance, rescaled so that each
//! month hits its target mean exactly. Wind capacity factor is a clipped AR(1)
//! process around a seasonal mean. Each month draws from its own stream
//! seeded by `(seed, month)`, so a month's series does not depend on which
//! other months were requested.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const DAYS_IN_MONTH: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Hourly persistence of the wind capacity-factor process.
pub const WIND_PERSISTENCE: f64 = 0.95;
/// Standard deviation of the hourly capacity-factor innovation.
pub const WIND_INNOVATION_SD: f64 = 0.04;

const DAILY_AMPLITUDE: f64 = 0.18;
const WEEKEND_FACTOR: f64 = 0.92;
const SEASONAL_AMPLITUDE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub demand_mw: Vec<f64>,
    pub wind_cf: Vec<f64>,
}

impl Profiles {
    pub fn wind_mw(&self, wind_capacity: f64) -> Vec<f64> {
        self.wind_cf.iter().map(|c| c * wind_capacity).collect()
    }
}

pub fn month_hours(month: u32) -> usize {
    DAYS_IN_MONTH[(month - 1) as usize] * 24
}

/// Hour of the year at which `month` starts (non-leap year).
pub fn month_offset(month: u32) -> usize {
    DAYS_IN_MONTH[..(month - 1) as usize].iter().sum::<usize>() * 24
}

/// Mean demand of `month` relative to January.
pub fn demand_season_factor(month: u32) -> f64 {
    let raw = |m: u32| 1.0 + SEASONAL_AMPLITUDE * (2.0 * std::f64::consts::PI * (m - 1) as f64 / 12.0).cos();
    raw(month) / raw(1)
}

/// Climatological mean wind capacity factor of `month`; windier in winter.
pub fn wind_mean_cf(month: u32) -> f64 {
    0.34 + 0.10 * (2.0 * std::f64::consts::PI * (month - 1) as f64 / 12.0).cos()
}

fn month_rng(seed: u64, month: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(month))
}

/// Generates hourly demand (MW) and wind capacity factor for the requested
/// months, concatenated in the given order. `mean_demand` is the January mean;
/// other months are scaled by [`demand_season_factor`].
pub fn synth_profiles(
    seed: u64,
    months: &[u32],
    mean_demand: f64,
    wind_capacity: f64,
) -> Result<Profiles> {
    if !(mean_demand.is_finite() && mean_demand > 0.0) {
        return Err(Error::Precondition(format!(
            "mean demand must be > 0, got {mean_demand}"
        )));
    }
    if let Some(m) = months.iter().find(|m| !(1..=12).contains(*m)) {
        return Err(Error::Precondition(format!("month {m} outside 1..=12")));
    }
    let mut demand_mw = Vec::new();
    let mut wind_cf = Vec::new();
    for &month in months {
        let mut rng = month_rng(seed, month);
        let hours = month_hours(month);
        let first_day = month_offset(month) / 24;

        let noise = Normal::new(0.0, 0.01).expect("valid sd");
        let mut disturbance = 0.0_f64;
        let raw: Vec<f64> = (0..hours)
            .map(|h| {
                let hod = (h % 24) as f64;
                let day = first_day + h / 24;
                disturbance = (0.9 * disturbance + noise.sample(&mut rng)).clamp(-0.05, 0.05);
                let daily = 1.0 + DAILY_AMPLITUDE * (2.0 * std::f64::consts::PI * (hod - 11.5) / 24.0).sin();
                let weekly = if day % 7 >= 5 { WEEKEND_FACTOR } else { 1.0 };
                daily * weekly * (1.0 + disturbance)
            })
            .collect();
        let target = mean_demand * demand_season_factor(month);
        let scale = target * hours as f64 / raw.iter().sum::<f64>();
        demand_mw.extend(raw.iter().map(|r| r * scale));

        let mu = wind_mean_cf(month);
        let innov = Normal::new(0.0, WIND_INNOVATION_SD).expect("valid sd");
        let stationary_sd = WIND_INNOVATION_SD / (1.0 - WIND_PERSISTENCE * WIND_PERSISTENCE).sqrt();
        let mut dev = Normal::new(0.0, stationary_sd).expect("valid sd").sample(&mut rng);
        for _ in 0..hours {
            let cf = if wind_capacity > 0.0 {
                (mu + dev).clamp(0.0, 1.0)
            } else {
                0.0
            };
            wind_cf.push(cf);
            dev = WIND_PERSISTENCE * dev + innov.sample(&mut rng);
        }
    }
    Ok(Profiles { demand_mw, wind_cf })
}
