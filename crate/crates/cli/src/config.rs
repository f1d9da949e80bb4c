//! Scenario configuration files and unit-bearing inputs.
//!
//! A config file is JSON:
//! `{"scenario": "pulsar", "seed": 7, "parameters": {"mp": "1.4414 Msun"}, "output": {"dir": "out"}}`.
//! Command-line flags override `parameters` entry by entry.

use anyhow::{anyhow, bail, Context, Result};
use dsgrav_core::units::{Dimension, Quantity};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub stem: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Overlay the flags that were given on top of the config parameters and
/// deserialize the result; unknown keys are rejected by the target type.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Map<String, Value>>) -> Result<T> {
    let mut merged = config.cloned().unwrap_or_default();
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| anyhow!("invalid parameters: {e}"))
}

/// A quantity string such as `"1.4 Msun"` converted to geometric units.
/// A bare number is rejected unless the dimension is dimensionless.
pub fn geometric(field: &str, text: &str, dim: Dimension) -> Result<f64> {
    let q = Quantity::parse(text).map_err(|e| anyhow!("{field}: {e}"))?;
    if q.unit.is_empty() && dim != Dimension::Dimensionless {
        bail!("{field}: '{text}' has no unit (expected {})", expected_units(dim));
    }
    let v = q
        .to_geometric(dim)
        .map_err(|e| anyhow!("{field}: {e} (expected {})", expected_units(dim)))?;
    if !v.is_finite() {
        bail!("{field}: '{text}' overflows in geometric units");
    }
    Ok(v)
}

/// A quantity string converted to SI (kg, m, s).
pub fn si(field: &str, text: &str, dim: Dimension) -> Result<f64> {
    geometric(field, text, dim)?;
    Quantity::parse(text)
        .and_then(|q| q.to_si(dim))
        .map_err(|e| anyhow!("{field}: {e}"))
}

fn expected_units(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Mass => "kg, Msun or m",
        Dimension::Length => "m, km, AU or Msun",
        Dimension::Time => "s, day, yr or m",
        Dimension::Dimensionless => "no unit",
    }
}

/// Comma-separated numbers; blank text is an empty list.
pub fn number_list(field: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("{field}: '{s}' is not a number"))
        })
        .collect()
}
