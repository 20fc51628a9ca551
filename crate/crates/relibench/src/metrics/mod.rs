//! Quantitative machinery: pass^k estimation, the reliability surface
//! and its scalar summaries, recovery statistics, ablation tables, and
//! report emission.

pub mod ablation;
pub mod passk;
pub mod recovery;
pub mod report;
pub mod surface;

pub use ablation::{ablation_report, AblationError, AblationRow};
pub use passk::{estimate_pass_k, wilson_interval, PassKError};
pub use recovery::{recovery_stats, RecoveryStats};
pub use report::{
    ablation_csv, ablation_markdown, aggregate_cost, cost_markdown, recovery_markdown,
    surface_csv, surface_markdown, surface_plot_data, CostSummary, REPORT_FOOTER,
};
pub use surface::{
    build_surface, critical_threshold, degradation_gradient, surface_volume, Axis, Cell,
    Observation, ReliabilitySurface, SurfaceError,
};
