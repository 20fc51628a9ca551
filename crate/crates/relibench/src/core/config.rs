//! Run configuration: the experiment grid, budgets, and pricing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Ablation profile names for single-fault-type runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationName {
    TimeoutOnly,
    RateLimitOnly,
    PartialOnly,
    Mixed,
}

impl AblationName {
    pub const ALL: [AblationName; 4] = [
        AblationName::TimeoutOnly,
        AblationName::RateLimitOnly,
        AblationName::PartialOnly,
        AblationName::Mixed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationName::TimeoutOnly => "timeout_only",
            AblationName::RateLimitOnly => "rate_limit_only",
            AblationName::PartialOnly => "partial_only",
            AblationName::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for AblationName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-model pricing, USD per million tokens in each direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceRate {
    pub usd_per_1m_input: f64,
    pub usd_per_1m_output: f64,
}

/// December 2024 list prices for the two reference models.
pub fn default_price_table() -> BTreeMap<String, PriceRate> {
    let mut t = BTreeMap::new();
    t.insert(
        "gemini-2.0-flash".to_string(),
        PriceRate {
            usd_per_1m_input: 0.075,
            usd_per_1m_output: 0.30,
        },
    );
    t.insert(
        "gpt-4o".to_string(),
        PriceRate {
            usd_per_1m_input: 2.50,
            usd_per_1m_output: 10.00,
        },
    );
    t
}

const SUPPORTED_LEVELS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];

/// Experiment configuration. Mirrors the on-disk TOML file; unknown
/// keys are rejected on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub suite_id: String,
    pub k_trials: u32,
    pub epsilon_levels: Vec<f64>,
    pub lambda_levels: Vec<f64>,
    pub agent_ids: Vec<String>,
    pub model_id: String,
    pub global_seed: u64,
    pub max_turns_per_episode: u32,
    /// Acceptable reliability level for the critical-threshold scan.
    pub theta: f64,
    #[serde(default = "default_price_table")]
    pub price_table: BTreeMap<String, PriceRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation_profile: Option<AblationName>,
    /// Sampling temperature passed through to the model backend;
    /// None uses the backend's own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// When true each trial of a grid point re-perturbs the task with
    /// its own seed; default keeps one perturbed text per grid point.
    #[serde(default)]
    pub reperturb_per_trial: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    /// Grid defaults matching the reference experiment layout.
    pub fn paper_main() -> Self {
        RunConfig {
            suite_id: "main".to_string(),
            k_trials: 2,
            epsilon_levels: vec![0.0, 0.1, 0.2],
            lambda_levels: vec![0.0, 0.2],
            agent_ids: vec!["react".to_string(), "reflexion".to_string()],
            model_id: "gemini-2.0-flash".to_string(),
            global_seed: 42,
            max_turns_per_episode: 20,
            theta: 0.85,
            price_table: default_price_table(),
            ablation_profile: None,
            temperature: None,
            reperturb_per_trial: false,
        }
    }

    /// Ablation layout: the four single-fault profiles at one epsilon.
    pub fn paper_ablation() -> Self {
        let mut c = Self::paper_main();
        c.suite_id = "ablation".to_string();
        c.epsilon_levels = vec![0.0];
        c.lambda_levels = vec![0.2];
        c.ablation_profile = Some(AblationName::Mixed);
        c
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        let text = toml::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k_trials < 1 {
            return Err(ConfigError::Invalid("k_trials must be >= 1".into()));
        }
        if !(0.0 < self.theta && self.theta < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "theta {} must be in (0,1)",
                self.theta
            )));
        }
        if self.epsilon_levels.is_empty() || self.lambda_levels.is_empty() {
            return Err(ConfigError::Invalid("empty grid axis".into()));
        }
        for &e in &self.epsilon_levels {
            if !SUPPORTED_LEVELS.iter().any(|&s| (s - e).abs() < 1e-12) {
                return Err(ConfigError::Invalid(format!("unsupported epsilon {e}")));
            }
        }
        for &l in &self.lambda_levels {
            if !SUPPORTED_LEVELS.iter().any(|&s| (s - l).abs() < 1e-12) {
                return Err(ConfigError::Invalid(format!("unsupported lambda {l}")));
            }
        }
        if self.agent_ids.is_empty() {
            return Err(ConfigError::Invalid("no agents configured".into()));
        }
        if !self.price_table.contains_key(&self.model_id) {
            return Err(ConfigError::Invalid(format!(
                "model {} missing from price table",
                self.model_id
            )));
        }
        Ok(())
    }

    /// Closed-form episode count for the configured grid.
    pub fn expected_episode_count(&self, n_tasks: usize) -> usize {
        let profile_axis = if self.ablation_profile.is_some() {
            AblationName::ALL.len()
        } else {
            self.lambda_levels.len()
        };
        n_tasks
            * self.epsilon_levels.len()
            * profile_axis
            * self.agent_ids.len()
            * self.k_trials as usize
    }
}
