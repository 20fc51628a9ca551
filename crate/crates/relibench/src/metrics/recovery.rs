//! Fault-recovery statistics: how often agents recover from explicit
//! error responses, and how many extra tool calls faults cost.

use std::collections::BTreeMap;

use crate::core::types::EpisodeRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryStats {
    /// Explicit-error faults only; silently modified responses are not
    /// counted as recovery opportunities.
    pub faults_encountered: usize,
    pub successful_recoveries: usize,
    /// Absent when no explicit fault was encountered.
    pub recovery_rate: Option<f64>,
    /// Mean over fault-bearing episodes of (tool calls − the fault-free
    /// median tool calls for the same task). Absent when no
    /// fault-bearing episode has a fault-free baseline.
    pub extra_tool_calls_per_fault: Option<f64>,
}

fn median(mut xs: Vec<usize>) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}

pub fn recovery_stats(records: &[EpisodeRecord]) -> RecoveryStats {
    let mut encountered = 0;
    let mut recovered = 0;
    // Fault-free call counts per task, for the extra-calls baseline.
    let mut clean_calls: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in records {
        for ev in &r.fault_events {
            if ev.was_explicit {
                encountered += 1;
                if ev.recovered {
                    recovered += 1;
                }
            }
        }
        if r.fault_events.is_empty() {
            clean_calls
                .entry(r.task_id.as_str())
                .or_default()
                .push(r.tool_calls.len());
        }
    }
    let mut extras = Vec::new();
    for r in records {
        if r.fault_events.is_empty() {
            continue;
        }
        if let Some(clean) = clean_calls.get(r.task_id.as_str()) {
            extras.push(r.tool_calls.len() as f64 - median(clean.clone()));
        }
    }
    RecoveryStats {
        faults_encountered: encountered,
        successful_recoveries: recovered,
        recovery_rate: (encountered > 0).then(|| recovered as f64 / encountered as f64),
        extra_tool_calls_per_fault: (!extras.is_empty())
            .then(|| extras.iter().sum::<f64>() / extras.len() as f64),
    }
}
