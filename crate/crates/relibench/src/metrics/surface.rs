//! The reliability surface R(k, ε, λ): per-grid-point pass^k means
//! over tasks, plus the scalar summaries derived from it (volume,
//! degradation gradients, critical thresholds).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::core::types::EpisodeRecord;
use crate::metrics::passk::{estimate_pass_k, wilson_interval, PassKError};

/// Minimal per-episode view needed for surface aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub task_id: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub trial_index: u32,
    pub success: bool,
}

impl From<&EpisodeRecord> for Observation {
    fn from(r: &EpisodeRecord) -> Self {
        Observation {
            task_id: r.task_id.clone(),
            epsilon: r.epsilon,
            lambda: r.lambda_level,
            trial_index: r.trial_index,
            success: r.success,
        }
    }
}

/// Axis levels are keyed in integer milli-units so grid lookups are
/// exact (0.2 → 200) regardless of float provenance.
pub fn milli(x: f64) -> u32 {
    (x * 1000.0).round() as u32
}

/// Grid key: (k, ε in milli, λ in milli).
pub type GridKey = (usize, u32, u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Mean over tasks of the per-task pass^k estimate.
    pub estimate: f64,
    pub n_tasks: usize,
    /// Trials per task entering the estimator (uniform across tasks).
    pub n_trials: usize,
    /// Per-task estimates, for dispersion reporting.
    pub per_task: BTreeMap<String, f64>,
    /// Approximate 95% Wilson interval over the task-mean proportion.
    pub wilson_95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilitySurface {
    pub k_values: Vec<usize>,
    pub epsilon_levels: Vec<f64>,
    pub lambda_levels: Vec<f64>,
    pub grid: BTreeMap<GridKey, Cell>,
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("no grid axes requested")]
    EmptyAxes,
    #[error("missing coverage at grid points: {0:?}")]
    MissingCoverage(Vec<String>),
    #[error("task {task_id} at (ε={epsilon}, λ={lambda}): {source}")]
    TooFewTrials {
        task_id: String,
        epsilon: f64,
        lambda: f64,
        source: PassKError,
    },
    #[error("point (k={0}, ε={1}, λ={2}) not on the surface grid")]
    PointOffGrid(usize, f64, f64),
    #[error("axis {0:?} has a single level; gradient undefined")]
    SinglePointAxis(Axis),
    #[error("empty surface")]
    EmptySurface,
}

/// Builds the surface from per-episode observations. Every requested
/// (ε, λ) point must be covered with at least max(k) trials per task.
pub fn build_surface(
    observations: &[Observation],
    k_values: &[usize],
    epsilon_levels: &[f64],
    lambda_levels: &[f64],
) -> Result<ReliabilitySurface, SurfaceError> {
    if k_values.is_empty() || epsilon_levels.is_empty() || lambda_levels.is_empty() {
        return Err(SurfaceError::EmptyAxes);
    }
    // Group outcomes per (ε, λ, task), ordered by trial index so
    // aggregation is independent of record order.
    let mut groups: BTreeMap<(u32, u32, String), BTreeMap<u32, bool>> = BTreeMap::new();
    for obs in observations {
        groups
            .entry((milli(obs.epsilon), milli(obs.lambda), obs.task_id.clone()))
            .or_default()
            .insert(obs.trial_index, obs.success);
    }

    let mut missing = Vec::new();
    let mut grid = BTreeMap::new();
    for &lambda in lambda_levels {
        for &epsilon in epsilon_levels {
            let (em, lm) = (milli(epsilon), milli(lambda));
            let tasks: Vec<(&String, &BTreeMap<u32, bool>)> = groups
                .range((em, lm, String::new())..=(em, lm, "\u{10FFFF}".to_string()))
                .map(|((_, _, t), v)| (t, v))
                .collect();
            if tasks.is_empty() {
                missing.push(format!("(ε={epsilon}, λ={lambda})"));
                continue;
            }
            for &k in k_values {
                let mut per_task = BTreeMap::new();
                let mut n_trials = 0;
                for (task_id, trials) in &tasks {
                    let outcomes: Vec<bool> = trials.values().copied().collect();
                    n_trials = n_trials.max(outcomes.len());
                    let est = estimate_pass_k(&outcomes, k).map_err(|source| {
                        SurfaceError::TooFewTrials {
                            task_id: (*task_id).clone(),
                            epsilon,
                            lambda,
                            source,
                        }
                    })?;
                    per_task.insert((*task_id).clone(), est);
                }
                let n_tasks = per_task.len();
                let estimate = per_task.values().sum::<f64>() / n_tasks as f64;
                grid.insert(
                    (k, em, lm),
                    Cell {
                        estimate,
                        n_tasks,
                        n_trials,
                        wilson_95: wilson_interval(estimate, n_tasks),
                        per_task,
                    },
                );
            }
        }
    }
    if !missing.is_empty() {
        return Err(SurfaceError::MissingCoverage(missing));
    }
    let surface = ReliabilitySurface {
        k_values: k_values.to_vec(),
        epsilon_levels: epsilon_levels.to_vec(),
        lambda_levels: lambda_levels.to_vec(),
        grid,
    };
    // pass^k is an all-k-succeed probability, so the surface must be
    // monotone non-increasing in k at fixed (ε, λ).
    for &lambda in lambda_levels {
        for &epsilon in epsilon_levels {
            let mut prev = f64::INFINITY;
            for &k in k_values {
                let est = surface.grid[&(k, milli(epsilon), milli(lambda))].estimate;
                debug_assert!(est <= prev + 1e-12, "pass^k not monotone in k");
                prev = est;
            }
        }
    }
    Ok(surface)
}

impl ReliabilitySurface {
    pub fn estimate(&self, k: usize, epsilon: f64, lambda: f64) -> Option<f64> {
        self.grid.get(&(k, milli(epsilon), milli(lambda))).map(|c| c.estimate)
    }
}

/// Trapezoid integral of `f` over sorted `xs`, divided by the extent.
/// A single point contributes its value directly.
fn normalized_trapezoid(xs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    if xs.len() == 1 {
        return f(xs[0]);
    }
    let mut area = 0.0;
    for w in xs.windows(2) {
        area += (f(w[0]) + f(w[1])) / 2.0 * (w[1] - w[0]);
    }
    area / (xs[xs.len() - 1] - xs[0])
}

/// Normalized surface volume in [0,1]: trapezoid over ε and λ extents,
/// arithmetic mean over k.
pub fn surface_volume(surface: &ReliabilitySurface) -> Result<f64, SurfaceError> {
    if surface.grid.is_empty() {
        return Err(SurfaceError::EmptySurface);
    }
    let mut eps = surface.epsilon_levels.clone();
    let mut lam = surface.lambda_levels.clone();
    eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for &k in &surface.k_values {
        total += normalized_trapezoid(&lam, |l| {
            normalized_trapezoid(&eps, |e| {
                surface.estimate(k, e, l).expect("built surface covers its axes")
            })
        });
    }
    Ok(total / surface.k_values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    K,
    Epsilon,
    Lambda,
}

/// Finite-difference slope of R along one axis at a grid point, in ΔR
/// per unit axis value: central where both neighbors exist, otherwise
/// one-sided.
pub fn degradation_gradient(
    surface: &ReliabilitySurface,
    k: usize,
    epsilon: f64,
    lambda: f64,
    axis: Axis,
) -> Result<f64, SurfaceError> {
    if surface.estimate(k, epsilon, lambda).is_none() {
        return Err(SurfaceError::PointOffGrid(k, epsilon, lambda));
    }
    let (mut levels, here): (Vec<f64>, f64) = match axis {
        Axis::K => (surface.k_values.iter().map(|&v| v as f64).collect(), k as f64),
        Axis::Epsilon => (surface.epsilon_levels.clone(), epsilon),
        Axis::Lambda => (surface.lambda_levels.clone(), lambda),
    };
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if levels.len() < 2 {
        return Err(SurfaceError::SinglePointAxis(axis));
    }
    let idx = levels
        .iter()
        .position(|&v| (v - here).abs() < 1e-9)
        .ok_or(SurfaceError::PointOffGrid(k, epsilon, lambda))?;
    let at = |v: f64| -> f64 {
        let (kk, ee, ll) = match axis {
            Axis::K => (v.round() as usize, epsilon, lambda),
            Axis::Epsilon => (k, v, lambda),
            Axis::Lambda => (k, epsilon, v),
        };
        surface.estimate(kk, ee, ll).expect("built surface covers its axes")
    };
    let (lo, hi) = if idx == 0 {
        (levels[0], levels[1])
    } else if idx == levels.len() - 1 {
        (levels[idx - 1], levels[idx])
    } else {
        (levels[idx - 1], levels[idx + 1])
    };
    Ok((at(hi) - at(lo)) / (hi - lo))
}

/// First grid point where R drops below θ, scanning ascending λ
/// (outer), ascending ε (middle), ascending k (inner).
pub fn critical_threshold(surface: &ReliabilitySurface, theta: f64) -> Option<(usize, f64, f64)> {
    let mut eps = surface.epsilon_levels.clone();
    let mut lam = surface.lambda_levels.clone();
    let mut ks = surface.k_values.clone();
    eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ks.sort_unstable();
    for &l in &lam {
        for &e in &eps {
            for &k in &ks {
                if let Some(r) = surface.estimate(k, e, l) {
                    if r < theta {
                        return Some((k, e, l));
                    }
                }
            }
        }
    }
    None
}
