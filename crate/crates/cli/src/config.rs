//! Training configuration from a flat TOML file plus command-line overrides.
//!
//! Keys are the field names of [`TrainingConfig`]. Flags are applied after
//! the file, so they win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use embias::TrainingConfig;
use toml::Value;

use crate::error::{CliError, Result};

pub const KEYS: [&str; 13] = [
    "dim",
    "window",
    "epochs",
    "batch",
    "negatives",
    "learning_rate",
    "subsample_t",
    "min_count",
    "ege_enabled",
    "ege_lambda",
    "ege_class_weighting",
    "seed",
    "threads",
];

pub fn load_config(path: Option<&Path>, overrides: &[(&str, Value)]) -> Result<TrainingConfig> {
    let mut cfg = TrainingConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (key, value) in parse_flat(&text)? {
            apply(&mut cfg, &key, &value)?;
        }
    }
    for (key, value) in overrides {
        apply(&mut cfg, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a flat document; tables and arrays are rejected.
pub fn parse_flat(text: &str) -> Result<Vec<(String, Value)>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::ConfigSyntax(e.message().to_string()))?;
    let mut out = Vec::with_capacity(table.len());
    for (key, value) in table {
        if matches!(value, Value::Table(_) | Value::Array(_)) {
            return Err(CliError::config(key, "nested values are not supported"));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn unsigned(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(CliError::config(
            key,
            format!("expected a non-negative integer, got {v}"),
        )),
    }
}

fn float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::config(key, format!("expected a number, got {v}"))),
    }
}

fn boolean(key: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| CliError::config(key, format!("expected true or false, got {v}")))
}

fn apply(cfg: &mut TrainingConfig, key: &str, v: &Value) -> Result<()> {
    let size = |v| unsigned(key, v).map(|n| n as usize);
    match key {
        "dim" => cfg.dim = size(v)?,
        "window" => cfg.window = size(v)?,
        "epochs" => cfg.epochs = size(v)?,
        "batch" => cfg.batch = size(v)?,
        "negatives" => cfg.negatives = size(v)?,
        "learning_rate" => cfg.learning_rate = float(key, v)?,
        "subsample_t" => cfg.subsample_t = float(key, v)?,
        "min_count" => cfg.min_count = unsigned(key, v)?,
        "ege_enabled" => cfg.ege_enabled = boolean(key, v)?,
        "ege_lambda" => cfg.ege_lambda = float(key, v)?,
        "ege_class_weighting" => cfg.ege_class_weighting = boolean(key, v)?,
        "seed" => cfg.seed = unsigned(key, v)?,
        "threads" => cfg.threads = size(v)?,
        _ => return Err(CliError::config(key, "unknown key")),
    }
    Ok(())
}

/// Every key with its resolved value, defaults included.
pub fn resolved(cfg: &TrainingConfig) -> BTreeMap<String, String> {
    let values = [
        cfg.dim.to_string(),
        cfg.window.to_string(),
        cfg.epochs.to_string(),
        cfg.batch.to_string(),
        cfg.negatives.to_string(),
        cfg.learning_rate.to_string(),
        cfg.subsample_t.to_string(),
        cfg.min_count.to_string(),
        cfg.ege_enabled.to_string(),
        cfg.ege_lambda.to_string(),
        cfg.ege_class_weighting.to_string(),
        cfg.seed.to_string(),
        cfg.threads.to_string(),
    ];
    KEYS.iter().map(|k| k.to_string()).zip(values).collect()
}
