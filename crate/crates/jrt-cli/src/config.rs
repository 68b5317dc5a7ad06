use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::suites;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown suite `{0}` (try --list)")]
    UnknownSuite(String),
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
    Csv,
}

/// Everything a run depends on. Two runs with equal configs produce
/// byte-identical reports unless `timings` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub prime: u64,
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    /// Empty means every suite that runs by default.
    pub suites: Vec<String>,
    /// Largest allowed log_p of a lattice index during enumeration.
    pub budget: u64,
    pub output: OutputFormat,
    pub height_bound: i64,
    /// Record wall-clock time per check; makes reports nondeterministic.
    pub timings: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            prime: 3,
            rank: 1,
            samples: 10,
            seed: 0,
            suites: vec![],
            budget: 24,
            output: OutputFormat::Json,
            height_bound: 2,
            timings: false,
        }
    }
}

/// Command-line values; each one that is set replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub prime: Option<u64>,
    pub rank: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub suites: Vec<String>,
    pub budget: Option<u64>,
    pub output: Option<OutputFormat>,
    pub height_bound: Option<i64>,
    pub timings: bool,
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        if let Some(v) = o.prime {
            self.prime = v;
        }
        if let Some(v) = o.rank {
            self.rank = v;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if !o.suites.is_empty() {
            self.suites = o.suites;
        }
        if let Some(v) = o.budget {
            self.budget = v;
        }
        if let Some(v) = o.output {
            self.output = v;
        }
        if let Some(v) = o.height_bound {
            self.height_bound = v;
        }
        self.timings |= o.timings;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if jrt::FieldConfig::new(self.prime).is_err() {
            return Err(ConfigError::Invalid { field: "prime", reason: format!("{} is not an odd prime", self.prime) });
        }
        if self.rank == 0 || self.rank > 3 {
            return Err(ConfigError::Invalid { field: "rank", reason: "must be 1, 2 or 3".into() });
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid { field: "samples", reason: "must be at least 1".into() });
        }
        if self.budget == 0 {
            return Err(ConfigError::Invalid { field: "budget", reason: "must be positive".into() });
        }
        if self.height_bound < 1 {
            return Err(ConfigError::Invalid { field: "height_bound", reason: "must be at least 1".into() });
        }
        for s in &self.suites {
            if suites::find(s).is_none() {
                return Err(ConfigError::UnknownSuite(s.clone()));
            }
        }
        Ok(())
    }

    /// Suite names in run order.
    pub fn selected_suites(&self) -> Vec<&'static str> {
        if self.suites.is_empty() {
            suites::registry().iter().filter(|s| s.default_run).map(|s| s.name).collect()
        } else {
            self.suites.iter().filter_map(|s| suites::find(s)).map(|s| s.name).collect()
        }
    }
}
