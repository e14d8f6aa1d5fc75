use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{synth_profiles, FrequencyParams, StorageUnit, SystemModel, ThermalClass, DEFAULT_VOLL};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    wind_capacity_mw: f64,
    #[serde(default = "default_voll")]
    voll_gbp_per_mwh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loss_class: Option<String>,
    frequency: FrequencyParams,
    #[serde(default)]
    thermal: Vec<ThermalClass>,
    #[serde(default)]
    storage: Vec<StorageUnit>,
    #[serde(default)]
    series: SeriesConfig,
}

fn default_voll() -> f64 {
    DEFAULT_VOLL
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
enum SeriesConfig {
    Inline {
        #[serde(default)]
        demand_mw: Vec<f64>,
        #[serde(default)]
        wind_cf: Vec<f64>,
    },
    Csv {
        demand_csv: PathBuf,
        wind_cf_csv: PathBuf,
    },
    Synthetic {
        seed: u64,
        months: Vec<u32>,
        mean_demand_mw: f64,
    },
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig::Inline {
            demand_mw: Vec::new(),
            wind_cf: Vec::new(),
        }
    }
}

/// Parses and validates a TOML system description. Relative series paths are
/// resolved against the working directory.
pub fn load_system(config_text: &str) -> Result<SystemModel> {
    load_with_base(config_text, None)
}

/// Like [`load_system`] but resolves series paths against the config file's
/// directory.
pub fn load_system_from_path(path: &Path) -> Result<SystemModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    load_with_base(&text, path.parent())
}

fn load_with_base(text: &str, base: Option<&Path>) -> Result<SystemModel> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (demand_series, wind_cf_series) = match doc.series {
        SeriesConfig::Inline { demand_mw, wind_cf } => (demand_mw, wind_cf),
        SeriesConfig::Csv {
            demand_csv,
            wind_cf_csv,
        } => {
            let resolve = |p: PathBuf| match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            };
            (
                read_series_csv(&resolve(demand_csv))?,
                read_series_csv(&resolve(wind_cf_csv))?,
            )
        }
        SeriesConfig::Synthetic {
            seed,
            months,
            mean_demand_mw,
        } => {
            let p = synth_profiles(seed, &months, mean_demand_mw, doc.wind_capacity_mw)?;
            (p.demand_mw, p.wind_cf)
        }
    };
    let model = SystemModel {
        thermal_classes: doc.thermal,
        storage: doc.storage,
        freq: doc.frequency,
        wind_capacity: doc.wind_capacity_mw,
        voll: doc.voll_gbp_per_mwh,
        loss_class: doc.loss_class,
        demand_series,
        wind_cf_series,
    };
    model.validate()?;
    Ok(model)
}

impl SystemModel {
    /// Serializes the model as a config document with the series inlined, so
    /// that `load_system(m.to_config_text())` reproduces `m` exactly.
    pub fn to_config_text(&self) -> Result<String> {
        let doc = ConfigDoc {
            wind_capacity_mw: self.wind_capacity,
            voll_gbp_per_mwh: self.voll,
            loss_class: self.loss_class.clone(),
            frequency: self.freq,
            thermal: self.thermal_classes.clone(),
            storage: self.storage.clone(),
            series: SeriesConfig::Inline {
                demand_mw: self.demand_series.clone(),
                wind_cf: self.wind_cf_series.clone(),
            },
        };
        toml::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    hour: usize,
    value: f64,
}

/// Reads an hourly series from a CSV with header `hour,value`. Hours must
/// run consecutively from 0.
pub fn read_series_csv(path: &Path) -> Result<Vec<f64>> {
    let missing = |reason: String| Error::MissingSeries {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| missing(e.to_string()))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<SeriesRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if row.hour != i {
            return Err(Error::Parse(format!(
                "{}: expected hour {i}, found {}",
                path.display(),
                row.hour
            )));
        }
        out.push(row.value);
    }
    Ok(out)
}

pub fn write_series_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (hour, &value) in values.iter().enumerate() {
        w.serialize(SeriesRow { hour, value })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_ONE: &str = r#"
wind_capacity_mw = 50000
loss_class = "nuclear"

[frequency]
f0_hz = 50
rocof_max_hz_per_s = 0.5
delta_f_max_hz = 0.8
t_pfr_s = 10
t_efr_s = 1
largest_loss_mw = 1800

[[thermal]]
name = "nuclear"
unit_count = 4
rated_power_mw = 1800
min_stable_gen_mw = 1800
no_load_cost_gbp_per_h = 0
marginal_cost_gbp_per_mwh = 10
startup_cost_gbp = 0
inertia_const_s = 5
max_response_mw = 0
response_slope = 0
must_run = true

[[thermal]]
name = "ccgt"
unit_count = 100
rated_power_mw = 500
min_stable_gen_mw = 250
no_load_cost_gbp_per_h = 7809
marginal_cost_gbp_per_mwh = 47
startup_cost_gbp = 10000
startup_time_h = 4
min_up_h = 4
min_down_h = 1
inertia_const_s = 5
max_response_mw = 50
response_slope = 0.5

[[thermal]]
name = "ocgt"
unit_count = 30
rated_power_mw = 100
min_stable_gen_mw = 50
no_load_cost_gbp_per_h = 8000
marginal_cost_gbp_per_mwh = 200
startup_cost_gbp = 0
inertia_const_s = 5
max_response_mw = 20
response_slope = 0.5
"#;

    #[test]
    fn table_one_config_loads() {
        let m = load_system(TABLE_ONE).unwrap();
        let counts: Vec<u32> = m.thermal_classes.iter().map(|c| c.unit_count).collect();
        assert_eq!(counts, vec![4, 100, 30]);
        assert_eq!(m.thermal_classes, super::super::table_one());
        assert_eq!(m.voll, DEFAULT_VOLL);
    }

    #[test]
    fn empty_system_is_valid() {
        let text = r#"
wind_capacity_mw = 0
[frequency]
f0_hz = 50
rocof_max_hz_per_s = 0.5
delta_f_max_hz = 0.8
t_pfr_s = 10
t_efr_s = 1
largest_loss_mw = 0
[series]
source = "inline"
demand_mw = [0.0, 0.0]
wind_cf = [0.0, 0.0]
"#;
        let m = load_system(text).unwrap();
        assert!(m.thermal_classes.is_empty());
        assert_eq!(m.hours(), 2);
    }

    #[test]
    fn min_stable_above_rated_names_field() {
        let bad = TABLE_ONE.replace("min_stable_gen_mw = 250", "min_stable_gen_mw = 600");
        match load_system(&bad) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "thermal[1].min_stable_gen_mw"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_text_is_parse_error() {
        assert!(matches!(load_system("wind_capacity_mw = ["), Err(Error::Parse(_))));
        let unknown = TABLE_ONE.replace("loss_class", "lost_class");
        assert!(matches!(load_system(&unknown), Err(Error::Parse(_))));
    }

    #[test]
    fn missing_series_file() {
        let text = format!(
            "{TABLE_ONE}\n[series]\nsource = \"csv\"\ndemand_csv = \"/nonexistent/d.csv\"\nwind_cf_csv = \"/nonexistent/w.csv\"\n"
        );
        assert!(matches!(load_system(&text), Err(Error::MissingSeries { .. })));
    }

    #[test]
    fn csv_series_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        write_series_csv(&dir.path().join("d.csv"), &[40000.0, 41000.5]).unwrap();
        write_series_csv(&dir.path().join("w.csv"), &[0.25, 0.3]).unwrap();
        let cfg = dir.path().join("sys.toml");
        std::fs::write(
            &cfg,
            format!("{TABLE_ONE}\n[series]\nsource = \"csv\"\ndemand_csv = \"d.csv\"\nwind_cf_csv = \"w.csv\"\n"),
        )
        .unwrap();
        let m = load_system_from_path(&cfg).unwrap();
        assert_eq!(m.demand_series, vec![40000.0, 41000.5]);
        assert_eq!(m.wind_cf_series, vec![0.25, 0.3]);
        let header = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
        assert!(header.starts_with("hour,value\n0,40000"));
    }

    #[test]
    fn synthetic_series_from_config() {
        let text = format!(
            "{TABLE_ONE}\n[series]\nsource = \"synthetic\"\nseed = 3\nmonths = [1]\nmean_demand_mw = 43000\n"
        );
        let m = load_system(&text).unwrap();
        assert_eq!(m.hours(), 31 * 24);
    }
}
