//! Service configuration: one flat TOML table whose keys are the engine
//! parameters plus the service's own, with `ADAPTNAV_<KEY>` environment
//! overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use adaptnav_core::engine::EngineConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prefix for environment overrides, e.g. `ADAPTNAV_SET_SIZE=8`.
pub const ENV_PREFIX: &str = "ADAPTNAV_";

/// Keys that are valid but absent from a serialized default (they default
/// to "unset").
const OPTIONAL_KEYS: &[&str] = &["fitness_click_modifier", "corpus"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    #[serde(flatten)]
    pub engine: EngineConfig,
    pub listen: String,
    /// Corpus to build the map from when the map file does not exist yet.
    pub corpus: Option<PathBuf>,
    pub map: PathBuf,
    pub store: PathBuf,
    /// Seconds between recomputations of every user's social WPI.
    pub social_recompute_period: u64,
    /// Number of social suggestions returned; at most `set_size`.
    pub suggestions_k: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            engine: EngineConfig::default(),
            listen: "127.0.0.1:8080".into(),
            corpus: None,
            map: "adaptnav-map.json".into(),
            store: "adaptnav.redb".into(),
            social_recompute_period: 60,
            suggestions_k: 5,
        }
    }
}

impl ServiceConfig {
    /// Reads `path` and applies overrides from the process environment.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text, std::env::vars())
    }

    /// Parses `text`, then applies every `ADAPTNAV_<KEY>` pair in `env`.
    /// Override values are read as TOML scalars where possible
    /// (`8`, `0.25`, `true`) and as plain strings otherwise.
    pub fn from_toml_str(
        text: &str,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse()?;
        for (name, raw) in env {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            table.insert(key.to_ascii_lowercase(), parse_scalar(&raw));
        }
        let known = known_keys();
        if let Some(bad) = table.keys().find(|k| !known.contains(k.as_str())) {
            return Err(ConfigError::UnknownKey(bad.clone()));
        }
        let config: Self = toml::Value::Table(table).try_into()?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.engine
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.suggestions_k == 0 || self.suggestions_k > self.engine.set_size {
            return Err(ConfigError::Invalid(format!(
                "suggestions_k {} outside 1..={}",
                self.suggestions_k, self.engine.set_size
            )));
        }
        if self.social_recompute_period == 0 {
            return Err(ConfigError::Invalid("social_recompute_period must be positive".into()));
        }
        Ok(())
    }
}

fn known_keys() -> BTreeSet<String> {
    let defaults = toml::Table::try_from(ServiceConfig::default()).expect("defaults serialize");
    defaults
        .into_iter()
        .map(|(k, _)| k)
        .chain(OPTIONAL_KEYS.iter().map(|k| k.to_string()))
        .collect()
}

fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .filter(|v| !v.is_table() && !v.is_array())
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
