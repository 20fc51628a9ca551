//! Report emitters: CSV and Markdown tables plus plot-data series for
//! the surface, ablation, recovery, and cost summaries.

use crate::core::types::EpisodeRecord;
use crate::metrics::ablation::AblationRow;
use crate::metrics::recovery::RecoveryStats;
use crate::metrics::surface::{milli, ReliabilitySurface};

/// Fixed footnote attached to Markdown reports. Gradient figures are
/// easy to misread as "per 0.1 step", so the unit convention is
/// spelled out once here.
pub const REPORT_FOOTER: &str =
    "Degradation gradients are expressed per unit of the stressor axis \
     (ΔR per 1.0 of ε or λ), not per measured 0.1 step.";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostSummary {
    pub episodes: usize,
    pub total_tokens_in: u64,
    pub total_tokens_out: u64,
    pub total_usd: f64,
    pub mean_usd_per_episode: f64,
}

/// Additive, order-free cost aggregation over episode records.
pub fn aggregate_cost(records: &[EpisodeRecord]) -> CostSummary {
    let mut s = CostSummary {
        episodes: records.len(),
        ..Default::default()
    };
    for r in records {
        s.total_tokens_in += r.tokens_in;
        s.total_tokens_out += r.tokens_out;
        s.total_usd += r.cost_usd;
    }
    if s.episodes > 0 {
        s.mean_usd_per_episode = s.total_usd / s.episodes as f64;
    }
    s
}

/// One CSV row per grid point, with the Wilson interval attached.
pub fn surface_csv(surface: &ReliabilitySurface) -> String {
    let mut out = String::from("k,epsilon,lambda,estimate,n_tasks,n_trials,wilson_lo,wilson_hi\n");
    for ((k, em, lm), cell) in &surface.grid {
        out.push_str(&format!(
            "{},{},{},{:.6},{},{},{:.6},{:.6}\n",
            k,
            *em as f64 / 1000.0,
            *lm as f64 / 1000.0,
            cell.estimate,
            cell.n_tasks,
            cell.n_trials,
            cell.wilson_95.0,
            cell.wilson_95.1,
        ));
    }
    out
}

/// Markdown surface table: one block per k, ε rows by λ columns.
pub fn surface_markdown(surface: &ReliabilitySurface) -> String {
    let mut out = String::new();
    for &k in &surface.k_values {
        out.push_str(&format!("### pass^{k} (%)\n\n"));
        out.push_str("| ε \\ λ |");
        for &l in &surface.lambda_levels {
            out.push_str(&format!(" {l} |"));
        }
        out.push('\n');
        out.push_str("|---|");
        out.push_str(&"---|".repeat(surface.lambda_levels.len()));
        out.push('\n');
        for &e in &surface.epsilon_levels {
            out.push_str(&format!("| {e} |"));
            for &l in &surface.lambda_levels {
                match surface.grid.get(&(k, milli(e), milli(l))) {
                    Some(cell) => out.push_str(&format!(" {:.2} |", cell.estimate * 100.0)),
                    None => out.push_str(" — |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(REPORT_FOOTER);
    out.push('\n');
    out
}

/// Plot-data series: one `series,x,y` row per grid point, where each
/// series fixes (k, λ) and sweeps ε. Enough to regenerate the surface
/// and degradation figures.
pub fn surface_plot_data(surface: &ReliabilitySurface) -> String {
    let mut out = String::from("series,x,y\n");
    for &k in &surface.k_values {
        for &l in &surface.lambda_levels {
            for &e in &surface.epsilon_levels {
                if let Some(cell) = surface.grid.get(&(k, milli(e), milli(l))) {
                    out.push_str(&format!("k{k}_lambda{l},{e},{:.6}\n", cell.estimate));
                }
            }
        }
    }
    out
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("profile,pass_rate,n_episodes,delta_vs_mixed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{},{:+.6}\n",
            r.profile, r.pass_rate, r.n_episodes, r.delta_vs_mixed
        ));
    }
    out
}

pub fn ablation_markdown(rows: &[AblationRow]) -> String {
    let mut out = String::from(
        "| Fault Profile | Pass@1 (%) | Δ vs Mixed (pp) |\n|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {:.2} | {:+.2} |\n",
            r.profile,
            r.pass_rate * 100.0,
            r.delta_vs_mixed * 100.0
        ));
    }
    out
}

pub fn recovery_markdown(stats: &RecoveryStats) -> String {
    let rate = match stats.recovery_rate {
        Some(r) => format!("{:.1}%", r * 100.0),
        None => "n/a".to_string(),
    };
    let extra = match stats.extra_tool_calls_per_fault {
        Some(x) => format!("{x:.2}"),
        None => "n/a".to_string(),
    };
    format!(
        "| Metric | Value |\n|---|---|\n\
         | Explicit faults encountered | {} |\n\
         | Successful recoveries | {} |\n\
         | Recovery rate | {} |\n\
         | Additional tool calls per fault | {} |\n",
        stats.faults_encountered, stats.successful_recoveries, rate, extra
    )
}

pub fn cost_markdown(cost: &CostSummary) -> String {
    format!(
        "| Metric | Value |\n|---|---|\n\
         | Episodes | {} |\n\
         | Tokens in | {} |\n\
         | Tokens out | {} |\n\
         | Total cost (USD) | {:.4} |\n\
         | Mean cost per episode (USD) | {:.6} |\n",
        cost.episodes,
        cost.total_tokens_in,
        cost.total_tokens_out,
        cost.total_usd,
        cost.mean_usd_per_episode
    )
}
