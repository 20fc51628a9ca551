//! Shared domain types, configuration, deterministic seeding, and
//! episode-log persistence.

pub mod config;
pub mod cost;
pub mod log;
pub mod seed;
pub mod types;

pub use config::{AblationName, PriceRate, RunConfig};
pub use cost::compute_cost;
pub use log::{read_episode_log, write_episode_log, LogError};
pub use seed::{derive_episode_seed, episode_rng, SeedStream};
pub use types::{
    AppliedMr, Complexity, Domain, EpisodeRecord, FaultEvent, GoalMeta, TaskSpec, ToolArgs,
    ToolCallRecord, Turn, SCHEMA_VERSION,
};
