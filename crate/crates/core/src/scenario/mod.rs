//! Quantile scenario trees for wind uncertainty and the rolling-planning loop.

mod rolling;

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::system::synth::{WIND_INNOVATION_SD, WIND_PERSISTENCE};

pub use rolling::{rolling_plan, ActualTrace, CommittedHour, Schedule};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Probability of reaching this node.
    pub probability: f64,
    /// Hours represented by the node.
    pub interval: f64,
    /// Absolute hour.
    pub hour: usize,
    pub depth: usize,
    /// MW.
    pub wind_available: f64,
    /// MW.
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    /// Topologically ordered, root first.
    pub nodes: Vec<ScenarioNode>,
    pub horizon: usize,
    /// Depths at which every node splits into one child per quantile.
    pub branch_stages: Vec<usize>,
}

/// AR(1) model of the wind capacity-factor forecast error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub persistence: f64,
    /// Standard deviation of the hourly innovation, per unit of capacity.
    pub innovation_sd: f64,
    /// Level the forecast relaxes towards, per unit of capacity.
    pub mean_cf: f64,
}

impl ErrorModel {
    pub fn new(mean_cf: f64) -> Self {
        ErrorModel {
            persistence: WIND_PERSISTENCE,
            innovation_sd: WIND_INNOVATION_SD,
            mean_cf,
        }
    }

    /// Forecast error standard deviation `k` hours ahead.
    pub fn sd_at(&self, k: usize) -> f64 {
        let phi = self.persistence;
        let var = if (1.0 - phi * phi).abs() < 1e-12 {
            k as f64
        } else {
            (1.0 - phi.powi(2 * k as i32)) / (1.0 - phi * phi)
        };
        self.innovation_sd * var.sqrt()
    }

    /// Expected capacity factor `k` hours after observing `cf0`.
    pub fn forecast_at(&self, cf0: f64, k: usize) -> f64 {
        self.mean_cf + self.persistence.powi(k as i32) * (cf0 - self.mean_cf)
    }
}

/// Current realization plus what is known about the next hours.
#[derive(Debug, Clone, PartialEq)]
pub struct RootState {
    pub hour: usize,
    /// MW available now.
    pub wind_mw: f64,
    pub wind_capacity: f64,
    /// Demand for hours `0..=horizon` relative to `hour` (treated as certain).
    pub demand: Vec<f64>,
    /// Optional median wind path in MW for hours `0..=horizon`; when absent
    /// the error model's conditional mean is used.
    pub wind_median: Option<Vec<f64>>,
}

/// Tree shape and forecast-error settings shared by every rolling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub quantiles: Vec<f64>,
    pub weights: Vec<f64>,
    pub horizon: usize,
    pub branch_stages: Vec<usize>,
    /// Use the actual trace as the median path instead of the AR forecast.
    pub perfect_median: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        let quantiles = vec![0.05, 0.5, 0.95];
        let weights = quantile_weights(&quantiles).expect("valid defaults");
        TreeConfig {
            quantiles,
            weights,
            horizon: 24,
            branch_stages: vec![1],
            perfect_median: false,
        }
    }
}

impl TreeConfig {
    pub fn deterministic(horizon: usize) -> Self {
        TreeConfig {
            quantiles: vec![0.5],
            weights: vec![1.0],
            horizon,
            branch_stages: vec![1],
            perfect_median: true,
        }
    }
}

fn check_quantiles(q: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::InvalidQuantile("no quantiles given".into()));
    }
    if let Some(x) = q.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::InvalidQuantile(format!("{x} outside (0, 1)")));
    }
    if q.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidQuantile("not strictly increasing".into()));
    }
    Ok(())
}

/// Probability mass between the midpoints of neighbouring quantiles.
pub fn quantile_weights(quantiles: &[f64]) -> Result<Vec<f64>> {
    check_quantiles(quantiles)?;
    let n = quantiles.len();
    let edge = |i: usize| match i {
        0 => 0.0,
        i if i == n => 1.0,
        i => 0.5 * (quantiles[i - 1] + quantiles[i]),
    };
    Ok((0..n).map(|i| edge(i + 1) - edge(i)).collect())
}

pub fn build_tree(
    root: &RootState,
    quantiles: &[f64],
    weights: &[f64],
    horizon: usize,
    branch_stages: &[usize],
    error_model: &ErrorModel,
) -> Result<ScenarioTree> {
    check_quantiles(quantiles)?;
    if weights.len() != quantiles.len() {
        return Err(Error::InvalidQuantile(format!(
            "{} quantiles but {} weights",
            quantiles.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::WeightSum(total));
    }
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    if root.demand.len() < horizon + 1 {
        return Err(Error::Precondition(format!(
            "demand forecast covers {} hours, need {}",
            root.demand.len(),
            horizon + 1
        )));
    }
    if let Some(m) = &root.wind_median {
        if m.len() < horizon + 1 {
            return Err(Error::Precondition("wind median path too short".into()));
        }
    }
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    let zs: Vec<f64> = quantiles.iter().map(|q| unit.inverse_cdf(*q)).collect();
    // a lone median quantile is the forecast itself
    let zs: Vec<f64> = zs.into_iter().map(|z| if z.abs() < 1e-12 { 0.0 } else { z }).collect();

    let cap = root.wind_capacity;
    let cf0 = if cap > 0.0 { root.wind_mw / cap } else { 0.0 };
    let wind_at = |k: usize, z: f64| -> f64 {
        if cap <= 0.0 {
            return 0.0;
        }
        let median = match &root.wind_median {
            Some(m) => m[k] / cap,
            None => error_model.forecast_at(cf0, k),
        };
        ((median + z * error_model.sd_at(k)).clamp(0.0, 1.0)) * cap
    };

    let mut nodes = vec![ScenarioNode {
        id: 0,
        parent: None,
        probability: 1.0,
        interval: 1.0,
        hour: root.hour,
        depth: 0,
        wind_available: root.wind_mw.clamp(0.0, cap.max(0.0)),
        demand: root.demand[0],
    }];
    // (node id, z of the latest branch) at the current depth
    let mut frontier = vec![(0usize, 0.0f64)];
    for k in 1..=horizon {
        let mut next = Vec::new();
        for &(parent, z_parent) in &frontier {
            let split = branch_stages.contains(&k);
            let children: Vec<(f64, f64)> = if split {
                zs.iter().copied().zip(weights.iter().copied()).collect()
            } else {
                vec![(z_parent, 1.0)]
            };
            for (z, w) in children {
                let id = nodes.len();
                nodes.push(ScenarioNode {
                    id,
                    parent: Some(parent),
                    probability: nodes[parent].probability * w,
                    interval: 1.0,
                    hour: root.hour + k,
                    depth: k,
                    wind_available: wind_at(k, z),
                    demand: root.demand[k],
                });
                next.push((id, z));
            }
        }
        frontier = next;
    }
    Ok(ScenarioTree {
        nodes,
        horizon,
        branch_stages: branch_stages.to_vec(),
    })
}

impl ScenarioTree {
    pub fn root(&self) -> &ScenarioNode {
        &self.nodes[0]
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &ScenarioNode> {
        self.nodes.iter().filter(move |n| n.parent == Some(id))
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ScenarioNode> {
        self.nodes.iter().filter(move |n| n.depth == self.horizon)
    }

    /// Ancestor `k` levels up (`k = 0` is the node itself).
    pub fn ancestor(&self, id: usize, k: usize) -> Option<usize> {
        let mut cur = id;
        for _ in 0..k {
            cur = self.nodes[cur].parent?;
        }
        Some(cur)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node", "parent", "prob", "hour", "wind", "demand"])?;
        for n in &self.nodes {
            out.write_record([
                n.id.to_string(),
                n.parent.map(|p| p.to_string()).unwrap_or_default(),
                n.probability.to_string(),
                n.hour.to_string(),
                n.wind_available.to_string(),
                n.demand.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
