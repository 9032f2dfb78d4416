//! Named simulation configurations and config merging.
//!
//! A run's configuration is assembled from JSON layers: defaults, then a
//! preset, then a config file, then command-line overrides. Later layers
//! replace earlier ones key by key.

use icdmt_core::sim::{ExperimentConfig, LatticeSource, Scenario, TrialBudget};
use icdmt_core::SystemConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::experiment::default_config;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    Compare,
    Outage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub mode: Mode,
    pub experiment: ExperimentConfig,
}

pub const PRESET_NAMES: [&str; 6] = [
    "siso-sanity",
    "2x2-compare",
    "2x2-compare-low",
    "2x2-full-cap",
    "siso-outage",
    "2x2-outage",
];

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn acceptance_budget() -> TrialBudget {
    TrialBudget {
        min_trials: 1_000_000,
        min_errors: 200,
        max_trials: 4_000_000,
    }
}

fn system(m: usize, n: usize) -> SystemConfig {
    SystemConfig::new(m, n).expect("preset sizes are valid")
}

pub fn preset(name: &str) -> Result<SimulateConfig> {
    let base = |m, n| ExperimentConfig {
        name: name.to_owned(),
        ..default_config(name, system(m, n))
    };
    let (mode, experiment) = match name {
        "siso-sanity" => (
            Mode::Sweep,
            ExperimentConfig {
                rho_db: grid(20.0, 40.0, 5.0),
                budget: acceptance_budget(),
                ..base(1, 1)
            },
        ),
        "2x2-compare" => (
            Mode::Compare,
            ExperimentConfig {
                rho_db: grid(20.0, 40.0, 5.0),
                budget: acceptance_budget(),
                lattice: LatticeSource::RandomBestOf { k: 10 },
                pilot_trials: 100_000,
                ..base(2, 2)
            },
        ),
        "2x2-compare-low" => (
            Mode::Compare,
            ExperimentConfig {
                rho_db: grid(2.0, 18.0, 4.0),
                budget: TrialBudget {
                    min_trials: 100_000,
                    min_errors: 200,
                    max_trials: 1_000_000,
                },
                lattice: LatticeSource::RandomBestOf { k: 10 },
                pilot_trials: 100_000,
                ..base(2, 2)
            },
        ),
        "2x2-full-cap" => (
            Mode::Sweep,
            ExperimentConfig {
                scenario: Scenario::FullDimension,
                rho_db: grid(20.0, 40.0, 5.0),
                budget: acceptance_budget(),
                ..base(2, 2)
            },
        ),
        "siso-outage" => (
            Mode::Outage,
            ExperimentConfig {
                rho_db: grid(5.0, 25.0, 5.0),
                budget: TrialBudget::fixed(1_000_000),
                ..base(1, 1)
            },
        ),
        "2x2-outage" => (
            Mode::Outage,
            ExperimentConfig {
                scenario: Scenario::FullDimension,
                rho_db: grid(5.0, 20.0, 5.0),
                budget: TrialBudget::fixed(1_000_000),
                ..base(2, 2)
            },
        ),
        other => return Err(Error::UnknownPreset(other.to_owned())),
    };
    Ok(SimulateConfig { mode, experiment })
}

/// Configuration used when neither a preset nor a file is given.
pub fn defaults() -> SimulateConfig {
    SimulateConfig {
        mode: Mode::Sweep,
        experiment: default_config("custom", system(1, 1)),
    }
}

/// Recursively overlays `top` on `base`: objects merge key by key, any
/// other value replaces. A tagged enum object is replaced whole when its
/// tag changes.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            let retag = matches!((b.get("kind"), t.get("kind")), (Some(x), Some(y)) if x != y);
            if retag {
                b.clear();
            }
            for (key, value) in t {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Merges `layers` over the defaults and deserialises the result.
pub fn resolve(layers: impl IntoIterator<Item = Value>) -> Result<SimulateConfig> {
    let mut value = serde_json::to_value(defaults())?;
    for layer in layers {
        merge(&mut value, layer);
    }
    serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
}
