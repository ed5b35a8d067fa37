//! JSON scenario configuration.
//!
//! Every key is optional; an empty object yields the baseline three-user
//! downlink (allocation 1/2, 1/3, 1/6; thresholds 0.9, 1.5, 2; both hops at
//! d = 0.5 with path-loss exponent 4, single antenna, epsilon = 0.005).

use std::path::Path;

use serde::Deserialize;

use crate::analytic::SystemScenario;
use crate::channel::{make_hop_stats, HopStats};
use crate::cli::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct HopConfig {
    m: Option<u32>,
    nt: Option<u32>,
    nr: Option<u32>,
    d: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    users: Option<usize>,
    alloc: Option<Vec<f64>>,
    thresholds: Option<Vec<f64>>,
    hop1: Option<HopConfig>,
    hop2: Option<HopConfig>,
    path_loss_alpha: Option<f64>,
}

fn build_hop(cfg: &HopConfig, alpha: f64) -> Result<HopStats, CliError> {
    make_hop_stats(
        cfg.d.unwrap_or(0.5),
        alpha,
        cfg.epsilon.unwrap_or(0.005),
        cfg.m.unwrap_or(1),
        cfg.nt.unwrap_or(1),
        cfg.nr.unwrap_or(1),
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

fn build_scenario(cfg: &ConfigFile) -> Result<SystemScenario, CliError> {
    let alloc = cfg
        .alloc
        .clone()
        .unwrap_or_else(|| vec![3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0]);
    let thresholds = cfg.thresholds.clone().unwrap_or_else(|| vec![0.9, 1.5, 2.0]);
    if let Some(users) = cfg.users {
        if users != alloc.len() {
            return Err(CliError::Config(format!(
                "users = {users} does not match alloc length {}",
                alloc.len()
            )));
        }
    }
    let alpha = cfg.path_loss_alpha.unwrap_or(4.0);
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CliError::Config(format!(
            "path_loss_alpha must be finite and non-negative, got {alpha}"
        )));
    }
    let hop1 = build_hop(cfg.hop1.as_ref().unwrap_or(&HopConfig::default()), alpha)?;
    let hop2 = build_hop(cfg.hop2.as_ref().unwrap_or(&HopConfig::default()), alpha)?;
    SystemScenario::new(alloc, thresholds, hop1, hop2)
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Parse and validate a scenario config; `None` yields the baseline.
pub fn load_config(path: Option<&Path>) -> Result<SystemScenario, CliError> {
    let cfg = match path {
        None => ConfigFile::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    build_scenario(&cfg)
}

/// Parse a scenario from a JSON string (used by tests and presets).
pub fn scenario_from_json(text: &str) -> Result<SystemScenario, CliError> {
    let cfg: ConfigFile =
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    build_scenario(&cfg)
}
