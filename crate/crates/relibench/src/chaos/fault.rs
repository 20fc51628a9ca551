//! The fault taxonomy: ten infrastructure fault types with fixed
//! recoverability and presentation kind.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// How a fault presents to the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    /// An in-band error text; the underlying state is untouched.
    ExplicitError,
    /// The real transition runs; only the result text is transformed.
    ModifiedResponse,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum FaultType {
    TransientTimeout,
    ConnectionReset,
    HighLatency,
    SoftRateLimit,
    HardRateLimit,
    PartialResponse,
    SchemaDrift,
    StaleData,
    EmptyResponse,
    CascadingFailure,
}

impl FaultType {
    pub const ALL: [FaultType; 10] = [
        FaultType::TransientTimeout,
        FaultType::ConnectionReset,
        FaultType::HighLatency,
        FaultType::SoftRateLimit,
        FaultType::HardRateLimit,
        FaultType::PartialResponse,
        FaultType::SchemaDrift,
        FaultType::StaleData,
        FaultType::EmptyResponse,
        FaultType::CascadingFailure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FaultType::TransientTimeout => "TransientTimeout",
            FaultType::ConnectionReset => "ConnectionReset",
            FaultType::HighLatency => "HighLatency",
            FaultType::SoftRateLimit => "SoftRateLimit",
            FaultType::HardRateLimit => "HardRateLimit",
            FaultType::PartialResponse => "PartialResponse",
            FaultType::SchemaDrift => "SchemaDrift",
            FaultType::StaleData => "StaleData",
            FaultType::EmptyResponse => "EmptyResponse",
            FaultType::CascadingFailure => "CascadingFailure",
        }
    }

    /// Whether a standard retry strategy can route around this fault.
    /// HighLatency never affects correctness; CascadingFailure is
    /// transient by construction (its rate boost decays).
    pub fn recoverable(self) -> bool {
        match self {
            FaultType::TransientTimeout
            | FaultType::ConnectionReset
            | FaultType::SoftRateLimit
            | FaultType::PartialResponse
            | FaultType::EmptyResponse
            | FaultType::HighLatency
            | FaultType::CascadingFailure => true,
            FaultType::HardRateLimit | FaultType::SchemaDrift | FaultType::StaleData => false,
        }
    }

    pub fn kind(self) -> FaultKind {
        match self {
            FaultType::TransientTimeout
            | FaultType::ConnectionReset
            | FaultType::SoftRateLimit
            | FaultType::HardRateLimit
            | FaultType::EmptyResponse
            | FaultType::CascadingFailure => FaultKind::ExplicitError,
            FaultType::HighLatency
            | FaultType::PartialResponse
            | FaultType::SchemaDrift
            | FaultType::StaleData => FaultKind::ModifiedResponse,
        }
    }

    /// In-band error text for explicit-error faults.
    pub fn error_text(self) -> &'static str {
        match self {
            FaultType::TransientTimeout => "status=error reason=transient_timeout request timed out, retry may succeed",
            FaultType::ConnectionReset => "status=error reason=connection_reset connection reset by peer",
            FaultType::SoftRateLimit => "status=error reason=rate_limited code=429 retry after a short wait",
            FaultType::HardRateLimit => "status=error reason=rate_limited code=429 quota exhausted, do not retry",
            FaultType::EmptyResponse => "status=ok count=0 results=none",
            FaultType::CascadingFailure => "status=error reason=upstream_degraded dependent service failing",
            _ => "status=error reason=internal",
        }
    }
}

impl std::fmt::Display for FaultType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaultType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FaultType::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown fault type {s:?}"))
    }
}
