//! The four simulated environments: deterministic state machines
//! exposing the domain tools, plus task generators and state-based
//! verifiers.

pub mod dates;
pub mod state;
pub mod tasks;
pub mod tools;
pub mod verify;

pub use state::DomainState;
pub use tasks::{all_task_suites, generate_task_suite, validate_task};
pub use tools::{apply_tool, catalog, is_read_only, ToolError, ToolSpec};
pub use verify::{verify, VerifierError};
