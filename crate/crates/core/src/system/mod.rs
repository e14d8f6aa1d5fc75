//! Static system data: thermal fleet, storage, frequency limits and the hourly
//! demand / wind series the scheduler runs against.
//!
//! Everything is carried in MW, MWh, hours, seconds and pounds. System inertia
//! is MW·s throughout (90 GW·s is 90 000 MW·s).

mod config;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{load_system, load_system_from_path, read_series_csv, write_series_csv};
pub use synth::{synth_profiles, Profiles};

/// One aggregated generator technology. Units inside a class are identical
/// and are committed as an integer count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalClass {
    pub name: String,
    pub unit_count: u32,
    /// MW per unit.
    #[serde(rename = "rated_power_mw")]
    pub rated_power: f64,
    /// MW per unit.
    #[serde(rename = "min_stable_gen_mw")]
    pub min_stable_gen: f64,
    /// £/h per online unit.
    #[serde(rename = "no_load_cost_gbp_per_h")]
    pub no_load_cost: f64,
    /// £/MWh.
    #[serde(rename = "marginal_cost_gbp_per_mwh")]
    pub marginal_cost: f64,
    /// £ per start.
    #[serde(rename = "startup_cost_gbp")]
    pub startup_cost: f64,
    /// Hours between the start-up decision and the unit being online.
    #[serde(rename = "startup_time_h", default)]
    pub startup_time: u32,
    #[serde(rename = "min_up_h", default)]
    pub min_up: u32,
    #[serde(rename = "min_down_h", default)]
    pub min_down: u32,
    /// Seconds.
    #[serde(rename = "inertia_const_s")]
    pub inertia_const: f64,
    /// MW of PFR per online unit.
    #[serde(rename = "max_response_mw")]
    pub max_response: f64,
    /// Fraction of headroom deliverable as PFR.
    pub response_slope: f64,
    /// Every unit online at its stable output for the whole horizon.
    #[serde(default)]
    pub must_run: bool,
}

impl ThermalClass {
    /// Kinetic energy of one online unit, MW·s.
    pub fn unit_inertia(&self) -> f64 {
        self.inertia_const * self.rated_power
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let field = |f: &str| format!("thermal[{idx}].{f}");
        let finite = [
            ("rated_power_mw", self.rated_power),
            ("min_stable_gen_mw", self.min_stable_gen),
            ("no_load_cost_gbp_per_h", self.no_load_cost),
            ("marginal_cost_gbp_per_mwh", self.marginal_cost),
            ("startup_cost_gbp", self.startup_cost),
            ("inertia_const_s", self.inertia_const),
            ("max_response_mw", self.max_response),
            ("response_slope", self.response_slope),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(field(name), "must be finite"));
            }
        }
        if self.name.trim().is_empty() {
            return Err(Error::validation(field("name"), "must not be empty"));
        }
        if self.min_stable_gen <= 0.0 {
            return Err(Error::validation(field("min_stable_gen_mw"), "must be > 0"));
        }
        if self.min_stable_gen > self.rated_power {
            return Err(Error::validation(
                field("min_stable_gen_mw"),
                format!(
                    "{} exceeds rated power {}",
                    self.min_stable_gen, self.rated_power
                ),
            ));
        }
        for (name, v) in [
            ("no_load_cost_gbp_per_h", self.no_load_cost),
            ("marginal_cost_gbp_per_mwh", self.marginal_cost),
            ("startup_cost_gbp", self.startup_cost),
            ("inertia_const_s", self.inertia_const),
            ("max_response_mw", self.max_response),
        ] {
            if v < 0.0 {
                return Err(Error::validation(field(name), "must be >= 0"));
            }
        }
        if self.max_response > self.rated_power {
            return Err(Error::validation(
                field("max_response_mw"),
                "exceeds rated power",
            ));
        }
        if !(0.0..=1.0).contains(&self.response_slope) {
            return Err(Error::validation(field("response_slope"), "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageUnit {
    pub name: String,
    #[serde(rename = "power_cap_mw")]
    pub power_cap: f64,
    #[serde(rename = "energy_cap_mwh")]
    pub energy_cap: f64,
    pub round_trip_eff: f64,
    /// MW of EFR the unit can hold; 0 when it does not provide EFR.
    #[serde(rename = "efr_capacity_mw", default)]
    pub efr_capacity: f64,
}

impl StorageUnit {
    /// One-way efficiency, the round trip split evenly between charge and discharge.
    pub fn one_way_eff(&self) -> f64 {
        self.round_trip_eff.sqrt()
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let field = |f: &str| format!("storage[{idx}].{f}");
        for (name, v) in [
            ("power_cap_mw", self.power_cap),
            ("energy_cap_mwh", self.energy_cap),
            ("round_trip_eff", self.round_trip_eff),
            ("efr_capacity_mw", self.efr_capacity),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(field(name), "must be finite"));
            }
        }
        if self.name.trim().is_empty() {
            return Err(Error::validation(field("name"), "must not be empty"));
        }
        if self.power_cap < 0.0 {
            return Err(Error::validation(field("power_cap_mw"), "must be >= 0"));
        }
        if self.energy_cap <= 0.0 {
            return Err(Error::validation(field("energy_cap_mwh"), "must be > 0"));
        }
        if !(self.round_trip_eff > 0.0 && self.round_trip_eff <= 1.0) {
            return Err(Error::validation(field("round_trip_eff"), "must lie in (0, 1]"));
        }
        if self.efr_capacity < 0.0 || self.efr_capacity > self.power_cap {
            return Err(Error::validation(
                field("efr_capacity_mw"),
                "must lie in [0, power_cap_mw]",
            ));
        }
        Ok(())
    }
}

/// Post-fault security limits and the size of the contingency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyParams {
    #[serde(rename = "f0_hz")]
    pub f0: f64,
    #[serde(rename = "rocof_max_hz_per_s")]
    pub rocof_max: f64,
    #[serde(rename = "delta_f_max_hz")]
    pub delta_f_max: f64,
    #[serde(rename = "t_pfr_s")]
    pub t_pfr: f64,
    #[serde(rename = "t_efr_s")]
    pub t_efr: f64,
    #[serde(rename = "largest_loss_mw")]
    pub largest_loss: f64,
}

impl FrequencyParams {
    /// GB limits: 50 Hz, 0.5 Hz/s RoCoF, 0.8 Hz nadir, PFR by 10 s, EFR by 1 s.
    pub fn gb(largest_loss: f64) -> Self {
        FrequencyParams {
            f0: 50.0,
            rocof_max: 0.5,
            delta_f_max: 0.8,
            t_pfr: 10.0,
            t_efr: 1.0,
            largest_loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f0_hz", self.f0),
            ("rocof_max_hz_per_s", self.rocof_max),
            ("delta_f_max_hz", self.delta_f_max),
            ("t_pfr_s", self.t_pfr),
            ("t_efr_s", self.t_efr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("frequency.{name}"), "must be > 0"));
            }
        }
        if !(self.largest_loss.is_finite() && self.largest_loss >= 0.0) {
            return Err(Error::validation("frequency.largest_loss_mw", "must be >= 0"));
        }
        if self.t_efr >= self.t_pfr {
            return Err(Error::validation(
                "frequency.t_efr_s",
                "EFR must be faster than PFR (t_efr_s < t_pfr_s)",
            ));
        }
        Ok(())
    }
}

/// Immutable, validated system description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub thermal_classes: Vec<ThermalClass>,
    pub storage: Vec<StorageUnit>,
    pub freq: FrequencyParams,
    /// MW.
    pub wind_capacity: f64,
    /// £/MWh of unserved demand.
    pub voll: f64,
    /// Class whose single unit is the largest infeed. Its own inertia is lost
    /// with it and so is not counted towards post-fault inertia.
    pub loss_class: Option<String>,
    /// MW, hourly.
    pub demand_series: Vec<f64>,
    /// Per unit of `wind_capacity`, hourly.
    pub wind_cf_series: Vec<f64>,
}

pub const DEFAULT_VOLL: f64 = 30_000.0;

impl SystemModel {
    pub fn validate(&self) -> Result<()> {
        for (i, tc) in self.thermal_classes.iter().enumerate() {
            tc.validate(i)?;
        }
        for (i, a) in self.thermal_classes.iter().enumerate() {
            if self.thermal_classes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::validation(
                    format!("thermal[{i}].name"),
                    format!("duplicate class name {:?}", a.name),
                ));
            }
        }
        for (i, s) in self.storage.iter().enumerate() {
            s.validate(i)?;
        }
        self.freq.validate()?;
        if !(self.wind_capacity.is_finite() && self.wind_capacity >= 0.0) {
            return Err(Error::validation("wind_capacity_mw", "must be >= 0"));
        }
        if !(self.voll.is_finite() && self.voll >= 0.0) {
            return Err(Error::validation("voll_gbp_per_mwh", "must be >= 0"));
        }
        if let Some(name) = &self.loss_class {
            if self.class_index(name).is_none() {
                return Err(Error::validation(
                    "loss_class",
                    format!("no thermal class named {name:?}"),
                ));
            }
        }
        if self.demand_series.len() != self.wind_cf_series.len() {
            return Err(Error::validation(
                "series",
                format!(
                    "demand has {} hours but wind has {}",
                    self.demand_series.len(),
                    self.wind_cf_series.len()
                ),
            ));
        }
        if let Some(h) = self
            .demand_series
            .iter()
            .position(|d| !(d.is_finite() && *d >= 0.0))
        {
            return Err(Error::validation(
                format!("series.demand[{h}]"),
                "demand must be finite and >= 0",
            ));
        }
        if let Some(h) = self
            .wind_cf_series
            .iter()
            .position(|c| !(0.0..=1.0).contains(c))
        {
            return Err(Error::validation(
                format!("series.wind_cf[{h}]"),
                "capacity factor must lie in [0, 1]",
            ));
        }
        Ok(())
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.thermal_classes.iter().position(|c| c.name == name)
    }

    pub fn loss_class_index(&self) -> Option<usize> {
        self.loss_class.as_deref().and_then(|n| self.class_index(n))
    }

    pub fn hours(&self) -> usize {
        self.demand_series.len()
    }

    pub fn wind_power(&self, hour: usize) -> f64 {
        self.wind_cf_series[hour] * self.wind_capacity
    }

    /// Same fleet with different frequency parameters and wind capacity.
    pub fn with_scenario(&self, wind_capacity: f64, largest_loss: f64) -> SystemModel {
        let mut m = self.clone();
        m.wind_capacity = wind_capacity;
        m.freq.largest_loss = largest_loss;
        m
    }

    /// Table I fleet with the future 1.8 GW loss, 50 GW of wind and GB storage.
    /// Series are left empty.
    pub fn gb_future() -> SystemModel {
        SystemModel {
            thermal_classes: table_one(),
            storage: gb_storage(),
            freq: FrequencyParams::gb(1800.0),
            wind_capacity: 50_000.0,
            voll: DEFAULT_VOLL,
            loss_class: Some("nuclear".into()),
            demand_series: Vec::new(),
            wind_cf_series: Vec::new(),
        }
    }

    /// Current system: a single 1.32 GW nuclear unit sets the largest loss,
    /// 25 GW of wind.
    pub fn gb_current() -> SystemModel {
        let mut classes = table_one();
        let nuclear = &mut classes[0];
        nuclear.unit_count = 1;
        nuclear.rated_power = 1320.0;
        nuclear.min_stable_gen = 1320.0;
        SystemModel {
            thermal_classes: classes,
            storage: gb_storage(),
            freq: FrequencyParams::gb(1320.0),
            wind_capacity: 25_000.0,
            voll: DEFAULT_VOLL,
            loss_class: Some("nuclear".into()),
            demand_series: Vec::new(),
            wind_cf_series: Vec::new(),
        }
    }
}

/// Thermal plant characteristics: nuclear, CCGT and OCGT.
pub fn table_one() -> Vec<ThermalClass> {
    vec![
        ThermalClass {
            name: "nuclear".into(),
            unit_count: 4,
            rated_power: 1800.0,
            min_stable_gen: 1800.0,
            no_load_cost: 0.0,
            marginal_cost: 10.0,
            startup_cost: 0.0,
            startup_time: 0,
            min_up: 0,
            min_down: 0,
            inertia_const: 5.0,
            max_response: 0.0,
            response_slope: 0.0,
            must_run: true,
        },
        ThermalClass {
            name: "ccgt".into(),
            unit_count: 100,
            rated_power: 500.0,
            min_stable_gen: 250.0,
            no_load_cost: 7809.0,
            marginal_cost: 47.0,
            startup_cost: 10_000.0,
            startup_time: 4,
            min_up: 4,
            min_down: 1,
            inertia_const: 5.0,
            max_response: 50.0,
            response_slope: 0.5,
            must_run: false,
        },
        ThermalClass {
            name: "ocgt".into(),
            unit_count: 30,
            rated_power: 100.0,
            min_stable_gen: 50.0,
            no_load_cost: 8000.0,
            marginal_cost: 200.0,
            startup_cost: 0.0,
            startup_time: 0,
            min_up: 0,
            min_down: 0,
            inertia_const: 5.0,
            max_response: 20.0,
            response_slope: 0.5,
            must_run: false,
        },
    ]
}

/// 2.6 GW / 10 GWh pumped hydro at 75 % and a 250 MW / 1 GWh battery at 96 %
/// holding up to 200 MW of EFR.
pub fn gb_storage() -> Vec<StorageUnit> {
    vec![
        StorageUnit {
            name: "pumped_hydro".into(),
            power_cap: 2600.0,
            energy_cap: 10_000.0,
            round_trip_eff: 0.75,
            efr_capacity: 0.0,
        },
        StorageUnit {
            name: "battery".into(),
            power_cap: 250.0,
            energy_cap: 1000.0,
            round_trip_eff: 0.96,
            efr_capacity: 200.0,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SystemModel::gb_future().validate().unwrap();
        SystemModel::gb_current().validate().unwrap();
    }

    #[test]
    fn efr_above_power_cap_rejected() {
        let mut m = SystemModel::gb_future();
        m.storage[1].efr_capacity = 300.0;
        let err = m.validate().unwrap_err();
        assert!(err.to_string().contains("storage[1].efr_capacity_mw"), "{err}");
    }

    #[test]
    fn efr_slower_than_pfr_rejected() {
        let mut m = SystemModel::gb_future();
        m.freq.t_efr = 12.0;
        assert!(m.validate().unwrap_err().to_string().contains("t_efr_s"));
    }

    #[test]
    fn series_mismatch_rejected() {
        let mut m = SystemModel::gb_future();
        m.demand_series = vec![1.0, 2.0];
        m.wind_cf_series = vec![0.5];
        assert!(m.validate().is_err());
        m.wind_cf_series = vec![0.5, 1.5];
        assert!(m.validate().unwrap_err().to_string().contains("wind_cf[1]"));
    }

    #[test]
    fn unknown_loss_class_rejected() {
        let mut m = SystemModel::gb_future();
        m.loss_class = Some("coal".into());
        assert!(m.validate().is_err());
    }
}
