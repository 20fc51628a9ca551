//! Fault injection: the fault taxonomy, lambda-level profiles, and the
//! fault-injecting tool-execution wrapper.

pub mod fault;
pub mod inject;
pub mod profile;

pub use fault::{FaultKind, FaultType};
pub use inject::{
    select_fault, FaultSession, InjectedOutcome, DRIFT_MAP, HIGH_LATENCY_MS, TRUNCATION_MARKER,
};
pub use profile::{build_ablation_profile, build_profile, load_profile, FaultProfile, ProfileError};
