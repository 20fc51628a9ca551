//! Fault profiles: the lambda-level presets and the single-fault
//! ablation profiles, plus loading custom profiles from config files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::fault::FaultType;
use crate::core::config::AblationName;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("unsupported lambda level {0}; expected one of 0.0, 0.1, 0.2, 0.3")]
    UnsupportedLevel(f64),
    #[error("fault weights sum to {0}, expected 1.0")]
    BadWeightSum(f64),
    #[error("failure_rate {0} out of [0,1]")]
    BadRate(f64),
    #[error("unknown fault type {0:?}")]
    UnknownFault(String),
    #[error("read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

/// One Λ(λ) preset: baseline failure rate plus the weighted fault mix.
/// Weights are kept in a fixed (enum) order so cumulative draws are
/// platform-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultProfile {
    pub name: String,
    /// The lambda level this profile represents on the grid axis.
    pub lambda_level: f64,
    pub failure_rate: f64,
    pub fault_weights: Vec<(FaultType, f64)>,
}

impl FaultProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if !(0.0..=1.0).contains(&self.failure_rate) {
            return Err(ProfileError::BadRate(self.failure_rate));
        }
        if self.failure_rate > 0.0 {
            let sum: f64 = self.fault_weights.iter().map(|(_, w)| w).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ProfileError::BadWeightSum(sum));
            }
        }
        Ok(())
    }

    pub fn weight(&self, fault: FaultType) -> f64 {
        self.fault_weights
            .iter()
            .find(|(f, _)| *f == fault)
            .map(|(_, w)| *w)
            .unwrap_or(0.0)
    }

    fn from_parts(
        name: &str,
        lambda_level: f64,
        failure_rate: f64,
        weights: &[(FaultType, f64)],
    ) -> FaultProfile {
        let p = FaultProfile {
            name: name.to_string(),
            lambda_level,
            failure_rate,
            fault_weights: weights.to_vec(),
        };
        debug_assert!(p.validate().is_ok());
        p
    }
}

/// The preset profile for one lambda grid level.
pub fn build_profile(lambda_level: f64) -> Result<FaultProfile, ProfileError> {
    use FaultType::*;
    let p = if lambda_level == 0.0 {
        FaultProfile::from_parts("baseline", 0.0, 0.0, &[])
    } else if (lambda_level - 0.1).abs() < 1e-12 {
        FaultProfile::from_parts(
            "light",
            0.1,
            0.075,
            &[(TransientTimeout, 0.4), (HighLatency, 0.3), (EmptyResponse, 0.3)],
        )
    } else if (lambda_level - 0.2).abs() < 1e-12 {
        FaultProfile::from_parts(
            "medium",
            0.2,
            0.175,
            &[
                (TransientTimeout, 0.25),
                (SoftRateLimit, 0.25),
                (PartialResponse, 0.2),
                (SchemaDrift, 0.15),
                (StaleData, 0.15),
            ],
        )
    } else if (lambda_level - 0.3).abs() < 1e-12 {
        FaultProfile::from_parts(
            "heavy",
            0.3,
            0.275,
            &[
                (TransientTimeout, 0.15),
                (ConnectionReset, 0.15),
                (HardRateLimit, 0.15),
                (PartialResponse, 0.15),
                (SchemaDrift, 0.2),
                (CascadingFailure, 0.2),
            ],
        )
    } else {
        return Err(ProfileError::UnsupportedLevel(lambda_level));
    };
    Ok(p)
}

/// Single-fault ablation profiles, all at the medium failure rate so
/// the only variable is the fault mix. `mixed` is the medium preset.
pub fn build_ablation_profile(name: AblationName) -> FaultProfile {
    use FaultType::*;
    let single = |profile_name: &str, fault: FaultType| {
        FaultProfile::from_parts(profile_name, 0.2, 0.175, &[(fault, 1.0)])
    };
    match name {
        AblationName::TimeoutOnly => single("timeout_only", TransientTimeout),
        AblationName::RateLimitOnly => single("rate_limit_only", SoftRateLimit),
        AblationName::PartialOnly => single("partial_only", PartialResponse),
        AblationName::Mixed => {
            let mut p = build_profile(0.2).expect("medium preset");
            p.name = "mixed".to_string();
            p
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    name: String,
    #[serde(default)]
    lambda_level: f64,
    failure_rate: f64,
    #[serde(default)]
    fault_weights: std::collections::BTreeMap<String, f64>,
}

/// Loads a custom profile from a config file laid out as
/// `failure_rate` plus a `fault_weights` table.
pub fn load_profile(path: &Path) -> Result<FaultProfile, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let raw: ProfileFile = toml::from_str(&text).map_err(|source| ProfileError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    let mut weights = Vec::new();
    // Enum order, not file order, for platform-stable cumulative draws.
    for fault in FaultType::ALL {
        if let Some(w) = raw.fault_weights.get(fault.as_str()) {
            weights.push((fault, *w));
        }
    }
    for key in raw.fault_weights.keys() {
        if key.parse::<FaultType>().is_err() {
            return Err(ProfileError::UnknownFault(key.clone()));
        }
    }
    let p = FaultProfile {
        name: raw.name,
        lambda_level: raw.lambda_level,
        failure_rate: raw.failure_rate,
        fault_weights: weights,
    };
    p.validate()?;
    Ok(p)
}
