//! Line-oriented `key = value` configuration files.
//!
//! Unknown keys are rejected; missing keys fall back to the built-in
//! defaults. Energies are given in µWh, the anomaly ratio as a fraction.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::energy::Energy;
use crate::sim::SimConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: invalid value `{value}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("line {line}: key `{key}`: {reason}")]
    OutOfRange { line: usize, key: String, reason: String },
    #[error("invalid energy table: {0}")]
    InvalidEnergyTable(#[from] crate::energy::EnergyTableError),
}

fn parse<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Debug,
{
    value.parse().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn range_err(line: usize, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange { line, key: key.to_string(), reason: reason.into() }
}

/// Parses configuration text into a `SimConfig`, starting from defaults.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed { line, text: raw.trim().to_string() });
        };
        let key = key.trim();
        let value = value.trim();

        match key {
            "sleep_uwh" => cfg.energy_table.sleep_per_iteration = Energy::from_uwh(parse(line, key, value)?),
            "capture_uwh" => cfg.energy_table.image_capture = Energy::from_uwh(parse(line, key, value)?),
            "infer_uwh" => cfg.energy_table.infer = Energy::from_uwh(parse(line, key, value)?),
            "upload_uwh" => cfg.energy_table.upload = Energy::from_uwh(parse(line, key, value)?),
            "train_per_image_uwh" => cfg.energy_table.train_per_image = Energy::from_uwh(parse(line, key, value)?),
            "battery_capacity_uwh" => cfg.battery_capacity = Energy::from_uwh(parse(line, key, value)?),
            "anomaly_ratio" => {
                let v: f64 = parse(line, key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(range_err(line, key, "must be in [0, 1]"));
                }
                cfg.anomaly_ratio = v;
            }
            "classification_reset" => cfg.classification_reset = parse(line, key, value)?,
            "sample_period_hours" => {
                let v: f64 = parse(line, key, value)?;
                if !(v > 0.0) {
                    return Err(range_err(line, key, "must be positive"));
                }
                cfg.sample_period_hours = v;
            }
            "validation_threshold" => {
                let v: f64 = parse(line, key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(range_err(line, key, "must be in [0, 1]"));
                }
                cfg.validation_threshold = v;
            }
            "n_classified_cap" => {
                let v: u32 = parse(line, key, value)?;
                if v == 0 {
                    return Err(range_err(line, key, "must be at least 1"));
                }
                cfg.n_classified_cap = v;
            }
            "seed" => cfg.seed = parse(line, key, value)?,
            "online_learning" => cfg.online_learning = parse(line, key, value)?,
            "q_alpha" => cfg.hyperparams.alpha = parse_unit_open(line, key, value)?,
            "q_gamma" => {
                let v: f64 = parse(line, key, value)?;
                if !(0.0..1.0).contains(&v) {
                    return Err(range_err(line, key, "must be in [0, 1)"));
                }
                cfg.hyperparams.gamma = v;
            }
            "q_epsilon" => {
                let v: f64 = parse(line, key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(range_err(line, key, "must be in [0, 1]"));
                }
                cfg.hyperparams.epsilon = v;
            }
            "q_alpha_decay" => cfg.hyperparams.alpha_decay = parse_unit_closed(line, key, value)?,
            "q_epsilon_decay" => cfg.hyperparams.epsilon_decay = parse_unit_closed(line, key, value)?,
            "q_gamma_per_hour" => {
                let v: f64 = parse(line, key, value)?;
                if !(0.0..1.0).contains(&v) {
                    return Err(range_err(line, key, "must be in (0, 1)"));
                }
                cfg.hyperparams.gamma_per_hour = Some(v);
            }
            "q_init" => cfg.hyperparams.q_init = parse(line, key, value)?,
            "train_episodes" => cfg.train_episodes = parse(line, key, value)?,
            "train_capacity_divisor" => {
                let v: u32 = parse(line, key, value)?;
                if v == 0 {
                    return Err(range_err(line, key, "must be at least 1"));
                }
                cfg.train_capacity_divisor = v;
            }
            other => {
                return Err(ConfigError::UnknownKey { line, key: other.to_string() });
            }
        }
    }

    cfg.energy_table.validate()?;
    Ok(cfg)
}

fn parse_unit_open(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(line, key, value)?;
    if !(v > 0.0 && v <= 1.0) {
        return Err(range_err(line, key, "must be in (0, 1]"));
    }
    Ok(v)
}

fn parse_unit_closed(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(line, key, value)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(range_err(line, key, "must be in [0, 1]"));
    }
    Ok(v)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
