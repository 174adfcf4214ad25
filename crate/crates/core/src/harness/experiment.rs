//! Experiment configuration: the simulation constants plus the training
//! schedule, loaded from TOML with dotted-path overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::nn::ActorVariant;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

/// One training run: scenario, architecture, and schedule.
///
/// The master seed lives in `sim.seed`; every random stream of the run
/// derives from it. The episode length is `sim.num_slots`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Actor architecture (`ckan`, `cnn`, or `mlp`).
    pub variant: ActorVariant,
    /// Total training episodes (0 = evaluate the initial policy only).
    pub max_episodes: usize,
    /// Episodes collected between update phases.
    pub episodes_per_update: usize,
    /// Gradient steps per agent per minibatch round (p_e).
    pub update_epochs: usize,
    /// Minibatches per update phase.
    pub minibatches: usize,
    /// Evaluation cadence, in episodes.
    pub eval_every: usize,
    /// Episodes averaged per evaluation point.
    pub eval_episodes: usize,
    /// Output directory for metrics, reward series, and checkpoints.
    pub output_dir: String,
    /// Parallel rollout workers (1 = fully serial).
    pub workers: usize,
    pub sim: SimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variant: ActorVariant::Ckan,
            max_episodes: 2000,
            episodes_per_update: 10,
            update_epochs: 5,
            minibatches: 4,
            eval_every: 50,
            eval_episodes: 3,
            output_dir: "out".into(),
            workers: 1,
            sim: SimConfig::desk_scale(),
        }
    }
}

impl ExperimentConfig {
    /// The master seed all random streams derive from.
    pub fn seed(&self) -> u64 {
        self.sim.seed
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate()?;
        fn at_least_one(field: &'static str, v: usize) -> Result<(), ConfigError> {
            if v == 0 {
                Err(ConfigError::Invalid { field, reason: "must be at least 1".into() })
            } else {
                Ok(())
            }
        }
        at_least_one("episodes_per_update", self.episodes_per_update)?;
        at_least_one("update_epochs", self.update_epochs)?;
        at_least_one("minibatches", self.minibatches)?;
        at_least_one("eval_every", self.eval_every)?;
        at_least_one("eval_episodes", self.eval_episodes)?;
        at_least_one("workers", self.workers)?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses a TOML config with `key=value` overrides applied before
/// deserialization. Override keys use dotted paths into the schema
/// (`sim.num_users=8`, `variant="mlp"`); unknown keys are rejected by the
/// schema, and values that do not parse as TOML are taken as strings.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ExperimentError> {
    let mut doc: toml::Table =
        text.parse().map_err(|e: toml::de::Error| ExperimentError::Parse(e.to_string()))?;
    for raw in overrides {
        let (path, value) = raw
            .split_once('=')
            .ok_or_else(|| ExperimentError::MalformedOverride(raw.clone()))?;
        let value = parse_override_value(value.trim());
        insert_path(&mut doc, path.trim(), value)
            .map_err(|e| ExperimentError::Parse(format!("override `{raw}`: {e}")))?;
    }
    let cfg: ExperimentConfig = toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| ExperimentError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads a config file; a missing path argument falls back to defaults with
/// overrides still applied.
pub fn load_config(
    path: Option<&Path>,
    overrides: &[String],
) -> Result<ExperimentConfig, ExperimentError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ExperimentError::Read {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    if text.is_empty() && path.is_none() {
        // Defaults, but still route through the override machinery.
        let base = toml::to_string(&ExperimentConfig::default()).expect("serializes");
        return parse_config(&base, overrides);
    }
    parse_config(&text, overrides)
}

fn parse_override_value(raw: &str) -> toml::Value {
    if let Ok(table) = format!("v = {raw}").parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

fn insert_path(doc: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty path segment".into());
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| format!("`{part}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        let back = parse_config(&text, &[]).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = parse_config(
            "",
            &[
                "variant=\"mlp\"".into(),
                "max_episodes=12".into(),
                "sim.num_users=7".into(),
                "sim.seed=99".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.variant, ActorVariant::Mlp);
        assert_eq!(cfg.max_episodes, 12);
        assert_eq!(cfg.sim.num_users, 7);
        assert_eq!(cfg.seed(), 99);
    }

    #[test]
    fn bare_string_override_is_accepted() {
        let cfg = parse_config("", &["variant=mlp".into()]).unwrap();
        assert_eq!(cfg.variant, ActorVariant::Mlp);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("definitely_not_a_key = 3", &[]).is_err());
        assert!(parse_config("", &["sim.not_a_field=1".into()]).is_err());
        assert!(parse_config("", &["nonsense".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(parse_config("", &["sim.clip_epsilon=2.0".into()]).is_err());
        assert!(parse_config("", &["minibatches=0".into()]).is_err());
    }
}
