//! Fault-type ablation report: pass@1 per single-fault profile and the
//! signed delta against the mixed profile.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::core::config::AblationName;
use crate::core::types::EpisodeRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub profile: AblationName,
    pub pass_rate: f64,
    pub n_episodes: usize,
    /// Signed pass-rate difference against the mixed profile; 0 for
    /// the mixed row itself.
    pub delta_vs_mixed: f64,
}

#[derive(Debug, Error)]
pub enum AblationError {
    #[error("no episodes for ablation profile {0}")]
    MissingProfile(AblationName),
}

/// Builds the four-row ablation table from episodes that carry a
/// `fault_profile` tag. Episodes without the tag are ignored.
pub fn ablation_report(records: &[EpisodeRecord]) -> Result<Vec<AblationRow>, AblationError> {
    let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        if let Some(profile) = &r.fault_profile {
            let (n, s) = groups.entry(profile.as_str()).or_default();
            *n += 1;
            if r.success {
                *s += 1;
            }
        }
    }
    let rate_of = |name: AblationName| -> Result<(f64, usize), AblationError> {
        let (n, s) = groups
            .get(name.as_str())
            .copied()
            .filter(|&(n, _)| n > 0)
            .ok_or(AblationError::MissingProfile(name))?;
        Ok((s as f64 / n as f64, n))
    };
    let (mixed_rate, _) = rate_of(AblationName::Mixed)?;
    let mut rows = Vec::new();
    for profile in AblationName::ALL {
        let (pass_rate, n_episodes) = rate_of(profile)?;
        rows.push(AblationRow {
            profile,
            pass_rate,
            n_episodes,
            delta_vs_mixed: pass_rate - mixed_rate,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::types::{Domain, SCHEMA_VERSION};
    use crate::domains::state::DomainState;

    fn record(profile: AblationName, success: bool) -> EpisodeRecord {
        EpisodeRecord {
            schema_version: SCHEMA_VERSION,
            task_id: "t".into(),
            epsilon: 0.0,
            lambda_level: 0.2,
            fault_profile: Some(profile.as_str().to_string()),
            trial_index: 0,
            agent_id: "react".into(),
            model_id: "stub".into(),
            seed: 0,
            perturbed_description: String::new(),
            applied_mrs: vec![],
            transcript: vec![],
            tool_calls: vec![],
            fault_events: vec![],
            success,
            final_state: DomainState::empty(Domain::Scheduling),
            tokens_in: 0,
            tokens_out: 0,
            wall_ms: 0,
            cost_usd: 0.0,
        }
    }

    fn batch(profile: AblationName, successes: usize, total: usize) -> Vec<EpisodeRecord> {
        (0..total).map(|i| record(profile, i < successes)).collect()
    }

    #[test]
    fn reproduces_reported_ablation_deltas() {
        // Pass rates {98.75, 93.75, 97.50, 96.25}% from 80 episodes
        // each give deltas {+2.50, −2.50, +1.25, 0} against mixed.
        let mut records = Vec::new();
        records.extend(batch(AblationName::TimeoutOnly, 79, 80));
        records.extend(batch(AblationName::RateLimitOnly, 75, 80));
        records.extend(batch(AblationName::PartialOnly, 78, 80));
        records.extend(batch(AblationName::Mixed, 77, 80));
        let rows = ablation_report(&records).unwrap();
        let pct: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.pass_rate * 100.0, r.delta_vs_mixed * 100.0))
            .collect();
        assert!((pct[0].0 - 98.75).abs() < 1e-9 && (pct[0].1 - 2.50).abs() < 1e-9);
        assert!((pct[1].0 - 93.75).abs() < 1e-9 && (pct[1].1 + 2.50).abs() < 1e-9);
        assert!((pct[2].0 - 97.50).abs() < 1e-9 && (pct[2].1 - 1.25).abs() < 1e-9);
        assert!((pct[3].0 - 96.25).abs() < 1e-9 && pct[3].1.abs() < 1e-9);
    }

    #[test]
    fn identical_logs_give_zero_deltas() {
        let mut records = Vec::new();
        for profile in AblationName::ALL {
            records.extend(batch(profile, 3, 4));
        }
        for row in ablation_report(&records).unwrap() {
            assert_eq!(row.delta_vs_mixed, 0.0);
        }
    }

    #[test]
    fn missing_mixed_is_a_coverage_error() {
        let mut records = Vec::new();
        records.extend(batch(AblationName::TimeoutOnly, 4, 4));
        records.extend(batch(AblationName::RateLimitOnly, 4, 4));
        records.extend(batch(AblationName::PartialOnly, 4, 4));
        assert!(matches!(
            ablation_report(&records),
            Err(AblationError::MissingProfile(AblationName::Mixed))
        ));
    }

    #[test]
    fn untagged_records_are_ignored() {
        let mut records = Vec::new();
        for profile in AblationName::ALL {
            records.extend(batch(profile, 2, 4));
        }
        let mut plain = record(AblationName::Mixed, true);
        plain.fault_profile = None;
        records.push(plain);
        let rows = ablation_report(&records).unwrap();
        assert!(rows.iter().all(|r| r.n_episodes == 4));
    }
}
