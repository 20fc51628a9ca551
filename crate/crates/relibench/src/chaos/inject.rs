//! The fault-injecting tool-execution wrapper: wraps the pure domain
//! transitions with seeded fault selection, per-episode fault memory,
//! and recovery semantics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chaos::fault::{FaultKind, FaultType};
use crate::chaos::profile::FaultProfile;
use crate::core::types::ToolArgs;
use crate::domains::state::DomainState;
use crate::domains::tools::{apply_tool, ToolError};

/// Appended to responses truncated by PartialResponse.
pub const TRUNCATION_MARKER: &str = " ...[truncated]";

/// Simulated extra latency added by HighLatency, in milliseconds.
pub const HIGH_LATENCY_MS: u64 = 2500;

/// Fixed key renames applied by SchemaDrift. One global map so agents
/// can in principle adapt to the drifted vocabulary.
pub const DRIFT_MAP: &[(&str, &str)] = &[
    ("price", "cost"),
    ("seats_left", "availability"),
    ("status", "state"),
    ("ticket_id", "case_id"),
    ("order_id", "ref_id"),
];

fn apply_drift(text: &str) -> String {
    let mut out = text.to_string();
    for (from, to) in DRIFT_MAP {
        // Keys only: rename `key=`, never values.
        out = out.replace(&format!("{from}="), &format!("{to}="));
    }
    out
}

/// Draws the fault decision for one tool call. Always consumes exactly
/// two rng values — one for whether a fault fires, one for which —
/// so downstream randomness is independent of the outcome (common
/// random numbers across profiles).
pub fn select_fault(profile: &FaultProfile, rng: &mut ChaCha8Rng) -> Option<FaultType> {
    select_fault_at_rate(profile, profile.failure_rate, rng)
}

fn select_fault_at_rate(
    profile: &FaultProfile,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Option<FaultType> {
    let u_fire: f64 = rng.gen();
    let u_pick: f64 = rng.gen();
    if u_fire >= rate || profile.fault_weights.is_empty() {
        return None;
    }
    let total: f64 = profile.fault_weights.iter().map(|(_, w)| w).sum();
    let mut acc = 0.0;
    for (fault, w) in &profile.fault_weights {
        acc += w / total;
        if u_pick < acc {
            return Some(*fault);
        }
    }
    Some(profile.fault_weights.last().expect("non-empty").0)
}

/// Result of one fault-wrapped tool call.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectedOutcome {
    pub state: DomainState,
    pub result_text: String,
    /// The fault that fired on this call, if any.
    pub fault: Option<FaultType>,
    /// Fault-type id recorded on the call (includes persisted drift).
    pub annotation: Option<String>,
    /// True when the call returned an in-band fault text and the state
    /// was left untouched (replay skips these calls).
    pub is_explicit: bool,
}

/// Per-episode fault injector. Holds the fault memory the execution
/// semantics need: retry cooldowns, the soft/hard rate-limit sets,
/// the cascade counter, and the initial-state snapshot StaleData
/// serves from. Confined to a single episode; never shared.
#[derive(Debug, Clone)]
pub struct FaultSession {
    profile: FaultProfile,
    snapshot: DomainState,
    /// (tool, args) keys whose next identical attempt is not re-faulted.
    cooldown: BTreeSet<String>,
    /// (tool, args) keys rate-limited until n more agent turns pass.
    soft_limited: BTreeMap<String, u32>,
    /// Tools failed for the episode remainder.
    hard_limited: BTreeSet<String>,
    /// Tools whose responses stay schema-drifted for the remainder.
    drifted: BTreeSet<String>,
    cascade_calls_left: u32,
    /// Simulated milliseconds accumulated by HighLatency.
    pub simulated_latency_ms: u64,
    /// Test hook: faults forced onto upcoming calls ahead of the draw.
    forced: VecDeque<FaultType>,
}

fn call_key(tool: &str, args: &ToolArgs) -> String {
    format!(
        "{tool}:{}",
        serde_json::to_string(args).expect("args serialize")
    )
}

impl FaultSession {
    pub fn new(profile: FaultProfile, initial_state: &DomainState) -> Self {
        FaultSession {
            profile,
            snapshot: initial_state.clone(),
            cooldown: BTreeSet::new(),
            soft_limited: BTreeMap::new(),
            hard_limited: BTreeSet::new(),
            drifted: BTreeSet::new(),
            cascade_calls_left: 0,
            simulated_latency_ms: 0,
            forced: VecDeque::new(),
        }
    }

    pub fn profile(&self) -> &FaultProfile {
        &self.profile
    }

    /// Forces the given fault on the next call (test hook; the fault
    /// draw is still consumed to keep rng streams aligned).
    pub fn force_next(&mut self, fault: FaultType) {
        self.forced.push_back(fault);
    }

    /// The failure rate in effect for the next call, including any
    /// active cascade boost.
    pub fn effective_rate(&self) -> f64 {
        if self.cascade_calls_left > 0 {
            (self.profile.failure_rate * 3.0).min(0.9)
        } else {
            self.profile.failure_rate
        }
    }

    /// Call once per agent turn; releases soft rate limits after their
    /// intervening turn has passed.
    pub fn note_turn(&mut self) {
        for turns in self.soft_limited.values_mut() {
            *turns = turns.saturating_sub(1);
        }
    }

    /// Executes one tool call under fault injection.
    pub fn execute(
        &mut self,
        state: &DomainState,
        tool: &str,
        args: &ToolArgs,
        rng: &mut ChaCha8Rng,
    ) -> Result<InjectedOutcome, ToolError> {
        let key = call_key(tool, args);
        let boosted = self.cascade_calls_left > 0;
        let rate = self.effective_rate();

        // The draw happens unconditionally: fixed two-value budget.
        let mut fault = select_fault_at_rate(&self.profile, rate, rng);
        if let Some(forced) = self.forced.pop_front() {
            fault = Some(forced);
        }
        if boosted {
            self.cascade_calls_left -= 1;
        }

        // Episode fault memory overrides the draw.
        if self.hard_limited.contains(tool) {
            fault = Some(FaultType::HardRateLimit);
        } else if self.cooldown.remove(&key) {
            fault = None;
        } else if let Some(turns) = self.soft_limited.get(&key).copied() {
            if turns == 0 {
                self.soft_limited.remove(&key);
                fault = None;
            } else {
                fault = Some(FaultType::SoftRateLimit);
            }
        }

        let outcome = match fault {
            Some(f) if f.kind() == FaultKind::ExplicitError => {
                match f {
                    FaultType::TransientTimeout
                    | FaultType::ConnectionReset
                    | FaultType::EmptyResponse => {
                        self.cooldown.insert(key);
                    }
                    FaultType::SoftRateLimit => {
                        self.soft_limited.entry(key).or_insert(1);
                    }
                    FaultType::HardRateLimit => {
                        self.hard_limited.insert(tool.to_string());
                    }
                    FaultType::CascadingFailure => {
                        self.cascade_calls_left = 3;
                    }
                    _ => {}
                }
                InjectedOutcome {
                    state: state.clone(),
                    result_text: f.error_text().to_string(),
                    fault: Some(f),
                    annotation: Some(f.as_str().to_string()),
                    is_explicit: true,
                }
            }
            Some(f) => {
                // Modified response: the real transition stands.
                let (new_state, mut text) = apply_tool(state, tool, args)?;
                if self.drifted.contains(tool) {
                    text = apply_drift(&text);
                }
                match f {
                    FaultType::PartialResponse => {
                        let keep = text.chars().count() / 2;
                        text = text.chars().take(keep).collect::<String>() + TRUNCATION_MARKER;
                    }
                    FaultType::SchemaDrift => {
                        text = apply_drift(&text);
                        self.drifted.insert(tool.to_string());
                    }
                    FaultType::StaleData => {
                        // Serve the result as computed at episode start.
                        let (_, stale) = apply_tool(&self.snapshot, tool, args)?;
                        text = stale;
                    }
                    FaultType::HighLatency => {
                        self.simulated_latency_ms += HIGH_LATENCY_MS;
                        text.push_str(&format!(" latency_ms={HIGH_LATENCY_MS}"));
                    }
                    _ => unreachable!("explicit faults handled above"),
                }
                InjectedOutcome {
                    state: new_state,
                    result_text: text,
                    fault: Some(f),
                    annotation: Some(f.as_str().to_string()),
                    is_explicit: false,
                }
            }
            None => {
                let (new_state, mut text) = apply_tool(state, tool, args)?;
                let mut annotation = None;
                if self.drifted.contains(tool) {
                    text = apply_drift(&text);
                    annotation = Some(FaultType::SchemaDrift.as_str().to_string());
                }
                InjectedOutcome {
                    state: new_state,
                    result_text: text,
                    fault: None,
                    annotation,
                    is_explicit: false,
                }
            }
        };
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::profile::{build_profile, FaultProfile};
    use crate::core::types::Domain;
    use rand_chacha::rand_core::SeedableRng;
    use serde_json::json;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn book_args() -> ToolArgs {
        [
            ("date".to_string(), json!("2026-01-01")),
            ("time".to_string(), json!("09:00")),
            ("topic".to_string(), json!("Review")),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn baseline_never_faults() {
        let p = build_profile(0.0).unwrap();
        let mut r = rng(1);
        for _ in 0..1000 {
            assert_eq!(select_fault(&p, &mut r), None);
        }
    }

    #[test]
    fn degenerate_profile_always_fires() {
        let p = FaultProfile {
            name: "deg".into(),
            lambda_level: 1.0,
            failure_rate: 1.0,
            fault_weights: vec![(FaultType::TransientTimeout, 1.0)],
        };
        let mut r = rng(2);
        for _ in 0..100 {
            assert_eq!(select_fault(&p, &mut r), Some(FaultType::TransientTimeout));
        }
    }

    #[test]
    fn medium_profile_monte_carlo_rates() {
        let p = build_profile(0.2).unwrap();
        let mut r = rng(3);
        let n = 100_000;
        let mut counts: BTreeMap<FaultType, u64> = BTreeMap::new();
        let mut fired = 0u64;
        for _ in 0..n {
            if let Some(f) = select_fault(&p, &mut r) {
                fired += 1;
                *counts.entry(f).or_insert(0) += 1;
            }
        }
        let rate = fired as f64 / n as f64;
        assert!((rate - 0.175).abs() < 0.004, "rate {rate}");
        for (fault, expected) in &p.fault_weights {
            let got = counts[fault] as f64 / fired as f64;
            assert!((got - expected).abs() < 0.01, "{fault}: {got} vs {expected}");
        }
    }

    #[test]
    fn draw_budget_is_exactly_two() {
        let p = build_profile(0.2).unwrap();
        let mut a = rng(4);
        let mut b = rng(4);
        select_fault(&p, &mut a);
        let _: f64 = b.gen();
        let _: f64 = b.gen();
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        // Same after a no-fault draw under baseline.
        let base = build_profile(0.0).unwrap();
        let mut a = rng(5);
        let mut b = rng(5);
        select_fault(&base, &mut a);
        let _: f64 = b.gen();
        let _: f64 = b.gen();
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn timeout_then_identical_retry_succeeds() {
        let s0 = DomainState::empty(Domain::Scheduling);
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::TransientTimeout);
        let mut r = rng(6);
        let first = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
        assert!(first.is_explicit);
        assert!(first.result_text.contains("transient_timeout"));
        assert_eq!(first.state, s0, "explicit fault leaves state unchanged");
        let second = session
            .execute(&first.state, "book_meeting", &book_args(), &mut r)
            .unwrap();
        assert_eq!(second.fault, None);
        assert!(second.result_text.starts_with("status=booked"), "{}", second.result_text);
    }

    #[test]
    fn explicit_faults_never_mutate_state() {
        let s0 = DomainState::empty(Domain::Scheduling);
        for fault in FaultType::ALL {
            if fault.kind() != FaultKind::ExplicitError {
                continue;
            }
            let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
            session.force_next(fault);
            let mut r = rng(7);
            let out = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
            assert_eq!(out.state, s0, "{fault}");
            assert!(out.is_explicit, "{fault}");
        }
    }

    fn travel_state() -> DomainState {
        crate::domains::tasks::generate_task_suite(Domain::Travel, 0)[0]
            .initial_state
            .clone()
    }

    fn search_args() -> ToolArgs {
        [
            ("origin".to_string(), json!("LON")),
            ("dest".to_string(), json!("PAR")),
            ("date".to_string(), json!("2026-01-05")),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn schema_drift_renames_keys_and_persists() {
        let s0 = travel_state();
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::SchemaDrift);
        let mut r = rng(8);
        let out = session.execute(&s0, "search_flights", &search_args(), &mut r).unwrap();
        assert!(out.result_text.contains("cost=300.00"), "{}", out.result_text);
        assert!(!out.result_text.contains("price="), "{}", out.result_text);
        assert!(out.result_text.contains("availability="), "{}", out.result_text);
        // Drift persists on the next, un-faulted call.
        let again = session.execute(&s0, "search_flights", &search_args(), &mut r).unwrap();
        assert_eq!(again.fault, None);
        assert!(again.result_text.contains("cost="), "{}", again.result_text);
        assert_eq!(again.annotation.as_deref(), Some("SchemaDrift"));
    }

    #[test]
    fn stale_data_serves_initial_snapshot() {
        let s0 = travel_state();
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        // Change the state: hold and confirm AA-500 so seats drop.
        let mut r = rng(9);
        let hold: ToolArgs = [("flight_id".to_string(), json!("AA-500"))].into_iter().collect();
        let s1 = session.execute(&s0, "hold_flight", &hold, &mut r).unwrap().state;
        let confirm: ToolArgs = [
            ("flight_id".to_string(), json!("AA-500")),
            ("passenger".to_string(), json!("Bob")),
            ("payment_info".to_string(), json!("card-1")),
        ]
        .into_iter()
        .collect();
        let s2 = session.execute(&s1, "confirm_booking", &confirm, &mut r).unwrap().state;
        session.force_next(FaultType::StaleData);
        let out = session.execute(&s2, "search_flights", &search_args(), &mut r).unwrap();
        assert!(out.result_text.contains("seats_left=10"), "stale text: {}", out.result_text);
        assert_eq!(out.state, s2, "state itself is not rolled back");
    }

    #[test]
    fn partial_response_truncates_with_marker() {
        let s0 = travel_state();
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::PartialResponse);
        let mut r = rng(10);
        let out = session.execute(&s0, "search_flights", &search_args(), &mut r).unwrap();
        assert!(out.result_text.ends_with(TRUNCATION_MARKER));
        let (_, full) = apply_tool(&s0, "search_flights", &search_args()).unwrap();
        assert_eq!(
            out.result_text.chars().count(),
            full.chars().count() / 2 + TRUNCATION_MARKER.chars().count()
        );
    }

    #[test]
    fn high_latency_preserves_result_and_adds_time() {
        let s0 = travel_state();
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::HighLatency);
        let mut r = rng(11);
        let out = session.execute(&s0, "search_flights", &search_args(), &mut r).unwrap();
        assert!(out.result_text.contains("price=300.00"));
        assert!(out.result_text.ends_with("latency_ms=2500"));
        assert_eq!(session.simulated_latency_ms, HIGH_LATENCY_MS);
    }

    #[test]
    fn hard_rate_limit_persists_for_episode() {
        let s0 = DomainState::empty(Domain::Scheduling);
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::HardRateLimit);
        let mut r = rng(12);
        let first = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
        assert!(first.result_text.contains("quota exhausted"));
        for _ in 0..3 {
            let again = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
            assert_eq!(again.fault, Some(FaultType::HardRateLimit));
            assert_eq!(again.state, s0);
        }
    }

    #[test]
    fn soft_rate_limit_releases_after_intervening_turn() {
        let s0 = DomainState::empty(Domain::Scheduling);
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        session.force_next(FaultType::SoftRateLimit);
        let mut r = rng(13);
        let first = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
        assert_eq!(first.fault, Some(FaultType::SoftRateLimit));
        // Immediate retry, no intervening turn: still limited.
        let retry = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
        assert_eq!(retry.fault, Some(FaultType::SoftRateLimit));
        session.note_turn();
        let after = session.execute(&s0, "book_meeting", &book_args(), &mut r).unwrap();
        assert_eq!(after.fault, None);
        assert!(after.result_text.starts_with("status=booked"));
    }

    #[test]
    fn cascading_failure_boosts_rate_for_three_calls() {
        let s0 = DomainState::empty(Domain::Scheduling);
        let mut session = FaultSession::new(build_profile(0.2).unwrap(), &s0);
        session.force_next(FaultType::CascadingFailure);
        let mut r = rng(14);
        let out = session.execute(&s0, "list_meetings", &ToolArgs::new(), &mut r).unwrap();
        assert_eq!(out.fault, Some(FaultType::CascadingFailure));
        assert!((session.effective_rate() - 0.175 * 3.0).abs() < 1e-12);
        for _ in 0..3 {
            let _ = session.execute(&s0, "list_meetings", &ToolArgs::new(), &mut r).unwrap();
        }
        assert_eq!(session.effective_rate(), 0.175, "boost expires after 3 calls");
    }

    #[test]
    fn lambda_zero_is_transparent() {
        let s0 = travel_state();
        let mut session = FaultSession::new(build_profile(0.0).unwrap(), &s0);
        let mut r = rng(15);
        let out = session.execute(&s0, "search_flights", &search_args(), &mut r).unwrap();
        let (plain_state, plain_text) = apply_tool(&s0, "search_flights", &search_args()).unwrap();
        assert_eq!(out.state, plain_state);
        assert_eq!(out.result_text, plain_text);
        assert_eq!(out.fault, None);
    }

    #[test]
    fn identical_seeds_give_identical_decisions() {
        let s0 = travel_state();
        let run = |seed: u64| {
            let mut session = FaultSession::new(build_profile(0.3).unwrap(), &s0);
            let mut r = rng(seed);
            (0..50)
                .map(|_| {
                    session
                        .execute(&s0, "search_flights", &search_args(), &mut r)
                        .unwrap()
                        .fault
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43), "different seeds diverge somewhere");
    }
}
