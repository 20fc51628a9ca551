//! Reliability harness for tool-calling agents.
//!
//! Measures a three-dimensional reliability surface over consistency
//! (repeated trials), robustness (goal-preserving description
//! perturbations), and fault tolerance (injected infrastructure
//! failures), across four simulated tool domains with deterministic
//! state-based verification.

pub mod agents;
pub mod chaos;
pub mod core;
pub mod domains;
pub mod metamorph;
pub mod metrics;
pub mod runner;
