//! Scenario runners that regenerate the figure datasets as CSV.
//!
//! Every run is a pure function of its configuration and seed. The CSV starts
//! with `#` comment lines holding the crate version, the experiment id, the
//! seed and the configuration as JSON, so a file documents how to rebuild it.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub mod bounds_sweep;
pub mod fig1;
pub mod fig4;
pub mod fig5;

pub use bounds_sweep::{fig2_dynamics_vs_t, fig3_dynamics_vs_lambda, BoundsSweepConfig, SweepRow};
pub use fig1::{fig1_region, Fig1Config, Fig1Result};
pub use fig4::{fig4_welfare_vs_load, Fig4Config, Fig4Row};
pub use fig5::{fig5_frg_ratio_vs_t, Fig5Config, Fig5Result};

/// Default seed when neither `--seed` nor `POWERGAME_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_100_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl ExperimentId {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig5" => Ok(Self::Fig5),
            _ => invalid(format!("unknown experiment {s:?}; expected fig1..fig5")),
        }
    }
}

/// Typed configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Fig1(Fig1Config),
    Fig2(BoundsSweepConfig),
    Fig3(BoundsSweepConfig),
    Fig4(Fig4Config),
    Fig5(Fig5Config),
}

impl ExperimentConfig {
    pub fn default_for(id: ExperimentId) -> Self {
        match id {
            ExperimentId::Fig1 => Self::Fig1(Fig1Config::default()),
            ExperimentId::Fig2 => Self::Fig2(BoundsSweepConfig::fig2()),
            ExperimentId::Fig3 => Self::Fig3(BoundsSweepConfig::fig3()),
            ExperimentId::Fig4 => Self::Fig4(Fig4Config::default()),
            ExperimentId::Fig5 => Self::Fig5(Fig5Config::default()),
        }
    }

    pub fn id(&self) -> ExperimentId {
        match self {
            Self::Fig1(_) => ExperimentId::Fig1,
            Self::Fig2(_) => ExperimentId::Fig2,
            Self::Fig3(_) => ExperimentId::Fig3,
            Self::Fig4(_) => ExperimentId::Fig4,
            Self::Fig5(_) => ExperimentId::Fig5,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configs serialize")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value)?)
    }
}

/// Applies `key=value` overrides to a JSON document. Keys are dotted paths
/// into existing fields (array elements by index); values parse as JSON and
/// fall back to plain strings.
pub fn apply_overrides(doc: &mut serde_json::Value, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| Error::InvalidConfig(format!("override {item:?} is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let mut node = &mut *doc;
        for part in key.split('.') {
            node = match node {
                serde_json::Value::Object(map) => map.get_mut(part),
                serde_json::Value::Array(items) => part.parse::<usize>().ok().and_then(move |j| items.get_mut(j)),
                _ => None,
            }
            .ok_or_else(|| Error::InvalidConfig(format!("unknown configuration key {key:?}")))?;
        }
        *node = value;
    }
    Ok(())
}

/// Rendered experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub id: ExperimentId,
    /// Full file contents, header included.
    pub csv: String,
}

pub(crate) fn header(config: &ExperimentConfig, seed: u64, extra: &[String]) -> String {
    let mut s = String::new();
    writeln!(s, "# powergame {} {}", env!("CARGO_PKG_VERSION"), config.id().name()).unwrap();
    writeln!(s, "# seed={seed}").unwrap();
    writeln!(s, "# config={}", serde_json::to_string(config).expect("configs serialize")).unwrap();
    for line in extra {
        writeln!(s, "# {line}").unwrap();
    }
    s
}

pub(crate) fn csv_body(columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Runs an experiment and renders its CSV.
pub fn run_experiment(config: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    let csv = match config {
        ExperimentConfig::Fig1(c) => fig1::render(config, &fig1_region(c)?, seed)?,
        ExperimentConfig::Fig2(c) => bounds_sweep::render(config, &fig2_dynamics_vs_t(c)?, seed, "t")?,
        ExperimentConfig::Fig3(c) => bounds_sweep::render(config, &fig3_dynamics_vs_lambda(c)?, seed, "lambda")?,
        ExperimentConfig::Fig4(c) => fig4::render(config, &fig4_welfare_vs_load(c, seed)?, seed)?,
        ExperimentConfig::Fig5(c) => fig5::render(config, &fig5_frg_ratio_vs_t(c, seed)?, seed)?,
    };
    Ok(ExperimentOutput { id: config.id(), csv })
}

/// Mean and standard error of a sample.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
