//! Deterministic scripted oracle: executes the canonical plan for a
//! task's verifier from goal metadata alone, with a standard retry
//! policy against recoverable faults. Used to certify solvability and
//! as the goal-preservation check for perturbations.

use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::agents::react::mark_recovered;
use crate::agents::Trajectory;
use crate::chaos::{FaultSession, TRUNCATION_MARKER};
use crate::core::types::{FaultEvent, TaskSpec, ToolArgs, ToolCallRecord, Turn};
use crate::domains::state::DomainState;

/// Texts produced only by injected faults, i.e. worth retrying.
pub(crate) fn is_faulty(text: &str) -> bool {
    text.contains("reason=transient_timeout")
        || text.contains("reason=connection_reset")
        || text.contains("reason=rate_limited")
        || text.contains("reason=upstream_degraded")
        || text.contains("results=none")
        || text.ends_with(TRUNCATION_MARKER)
}

pub(crate) fn is_hard_limit(text: &str) -> bool {
    text.contains("quota exhausted")
}

pub(crate) fn is_soft_limit(text: &str) -> bool {
    text.contains("retry after a short wait")
}

/// Extracts a `key=value` token, tolerating the drifted key name.
pub(crate) fn parse_token(text: &str, keys: &[&str]) -> Option<String> {
    for token in text.split_whitespace() {
        for key in keys {
            if let Some(v) = token.strip_prefix(&format!("{key}=")) {
                if !v.is_empty() {
                    return Some(v.to_string());
                }
            }
        }
    }
    None
}

struct OracleRun {
    state: DomainState,
    transcript: Vec<Turn>,
    tool_calls: Vec<ToolCallRecord>,
    fault_events: Vec<FaultEvent>,
    aborted: bool,
}

/// A hard rate limit on a goal-critical tool ends the plan early.
struct Aborted;

impl OracleRun {
    /// Executes one planned call with the standard retry policy: up to
    /// three retries on recoverable fault texts; a no-op turn before
    /// retrying a soft rate limit; abort on a hard limit.
    fn step(
        &mut self,
        session: &mut FaultSession,
        rng: &mut ChaCha8Rng,
        tool: &str,
        args: ToolArgs,
    ) -> Result<String, Aborted> {
        let mut last = String::new();
        for _attempt in 0..4 {
            let outcome = session
                .execute(&self.state, tool, &args, rng)
                .expect("oracle only calls registered tools");
            let index = self.tool_calls.len() as u32;
            if let Some(fault) = outcome.fault {
                self.fault_events.push(FaultEvent {
                    tool_call_index: index,
                    fault_id: fault.as_str().to_string(),
                    was_explicit: fault.kind() == crate::chaos::FaultKind::ExplicitError,
                    recovered: false,
                });
            }
            self.tool_calls.push(ToolCallRecord {
                index,
                tool_name: tool.to_string(),
                args: args.clone(),
                result_text: outcome.result_text.clone(),
                fault_annotation: outcome.annotation,
                is_explicit_fault: outcome.is_explicit,
            });
            self.transcript
                .push(Turn::new("tool", outcome.result_text.clone()));
            self.state = outcome.state;
            session.note_turn();
            last = outcome.result_text;
            if !is_faulty(&last) {
                return Ok(last);
            }
            if is_hard_limit(&last) {
                self.aborted = true;
                return Err(Aborted);
            }
            if is_soft_limit(&last) {
                self.transcript
                    .push(Turn::new("assistant", "waiting out the rate limit"));
            }
        }
        Ok(last)
    }
}

fn args(pairs: Vec<(&str, serde_json::Value)>) -> ToolArgs {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Runs the canonical plan for the task. The oracle reads goal_meta
/// and the task's verifier family, never the (possibly perturbed)
/// description text.
pub fn run_oracle(
    task: &TaskSpec,
    session: &mut FaultSession,
    rng: &mut ChaCha8Rng,
) -> Trajectory {
    let mut run = OracleRun {
        state: task.initial_state.clone(),
        transcript: vec![Turn::new("user", task.description.clone())],
        tool_calls: Vec::new(),
        fault_events: Vec::new(),
        aborted: false,
    };
    let g = |k: &str| task.goal_meta.get(k).unwrap_or_default().to_string();

    // An Err means a hard rate limit ended the plan early; the
    // resulting failure shows up in the final state.
    let _ = execute_plan(task, &mut run, session, rng, &g);
    mark_recovered(&run.tool_calls, &mut run.fault_events);
    Trajectory {
        transcript: run.transcript,
        tool_calls: run.tool_calls,
        fault_events: run.fault_events,
        final_state: run.state,
        tokens_in: 0,
        tokens_out: 0,
        turns_used: 0,
        finished: !run.aborted,
        simulated_latency_ms: session.simulated_latency_ms,
    }
}

fn execute_plan(
    task: &TaskSpec,
    run: &mut OracleRun,
    session: &mut FaultSession,
    rng: &mut ChaCha8Rng,
    g: &dyn Fn(&str) -> String,
) -> Result<(), Aborted> {
    match task.verifier_id.as_str() {
        "scheduling_booked" => {
            run.step(
                session,
                rng,
                "book_meeting",
                args(vec![
                    ("date", json!(g("date"))),
                    ("time", json!(g("time"))),
                    ("topic", json!(g("topic"))),
                ]),
            )?;
        }
        "scheduling_conflict" => {
            let first = run.step(
                session,
                rng,
                "book_meeting",
                args(vec![
                    ("date", json!(g("date"))),
                    ("time", json!(g("time"))),
                    ("topic", json!(g("topic"))),
                ]),
            )?;
            if first.contains("status=conflict") {
                run.step(
                    session,
                    rng,
                    "book_meeting",
                    args(vec![
                        ("date", json!(g("date"))),
                        ("time", json!(g("fallback_time"))),
                        ("topic", json!(g("topic"))),
                    ]),
                )?;
            }
        }
        "travel_direct" | "travel_cheapest" => {
            run.step(
                session,
                rng,
                "search_flights",
                args(vec![
                    ("origin", json!(g("origin"))),
                    ("dest", json!(g("dest"))),
                    ("date", json!(g("date"))),
                ]),
            )?;
            let flight_id = if task.verifier_id == "travel_direct" {
                g("flight_id")
            } else {
                // Cheapest matching flight; ties break by ascending id.
                let DomainState::Travel(t) = &task.initial_state else {
                    return Ok(());
                };
                let best = t
                    .flights_db
                    .iter()
                    .filter(|f| {
                        f.origin == g("origin") && f.dest == g("dest") && f.date == g("date")
                    })
                    .min_by(|a, b| {
                        a.price.partial_cmp(&b.price).unwrap().then_with(|| a.id.cmp(&b.id))
                    });
                match best {
                    Some(f) => f.id.clone(),
                    None => return Ok(()),
                }
            };
            run.step(session, rng, "hold_flight", args(vec![("flight_id", json!(flight_id))]))?;
            run.step(
                session,
                rng,
                "confirm_booking",
                args(vec![
                    ("flight_id", json!(flight_id)),
                    ("passenger", json!(g("passenger"))),
                    ("payment_info", json!("card-0000")),
                ]),
            )?;
        }
        "support_create_close" => {
            let created = run.step(
                session,
                rng,
                "create_ticket",
                args(vec![
                    ("customer_id", json!(g("customer_id"))),
                    ("subject", json!(g("subject"))),
                    ("description", json!("")),
                    ("priority", json!(g("priority"))),
                ]),
            )?;
            let ticket_id = parse_token(&created, &["ticket_id", "case_id"])
                .unwrap_or_else(|| predicted_ticket_id(task, run));
            run.step(
                session,
                rng,
                "close_ticket",
                args(vec![
                    ("ticket_id", json!(ticket_id)),
                    ("resolution", json!(g("resolution"))),
                ]),
            )?;
        }
        "support_escalate" => {
            run.step(
                session,
                rng,
                "search_knowledge_base",
                args(vec![("query", json!(g("query"))), ("category", json!(""))]),
            )?;
            run.step(
                session,
                rng,
                "escalate_ticket",
                args(vec![
                    ("ticket_id", json!(g("ticket_id"))),
                    ("reason", json!(g("reason"))),
                    ("escalate_to", json!(g("escalate_to"))),
                ]),
            )?;
        }
        "ecommerce_order" => {
            let qty: u32 = g("qty").parse().unwrap_or(1);
            run.step(
                session,
                rng,
                "create_order",
                args(vec![
                    ("customer_id", json!(g("customer_id"))),
                    ("items", json!([{ "sku": g("sku"), "qty": qty }])),
                    ("shipping_address", json!(g("address"))),
                    ("coupon_code", json!("")),
                ]),
            )?;
        }
        "ecommerce_cheapest_coupon" => {
            run.step(
                session,
                rng,
                "search_products",
                args(vec![("query", json!("")), ("category", json!(g("category")))]),
            )?;
            let DomainState::Ecommerce(e) = &task.initial_state else {
                return Ok(());
            };
            let Some(best) = e
                .catalog
                .iter()
                .filter(|p| p.category == g("category"))
                .min_by(|a, b| {
                    a.price.partial_cmp(&b.price).unwrap().then_with(|| a.sku.cmp(&b.sku))
                })
            else {
                return Ok(());
            };
            let qty: u32 = g("qty").parse().unwrap_or(1);
            run.step(
                session,
                rng,
                "apply_coupon",
                args(vec![
                    ("code", json!(g("coupon"))),
                    ("order_subtotal", json!(best.price * qty as f64)),
                ]),
            )?;
            run.step(
                session,
                rng,
                "create_order",
                args(vec![
                    ("customer_id", json!(g("customer_id"))),
                    ("items", json!([{ "sku": best.sku, "qty": qty }])),
                    ("shipping_address", json!(g("address"))),
                    ("coupon_code", json!(g("coupon"))),
                ]),
            )?;
        }
        _ => {}
    }
    Ok(())
}

/// Fallback when the create_ticket response was corrupted beyond
/// parsing: ticket ids are sequential, so the id is the initial
/// sequence plus the number of state-changing create calls so far.
fn predicted_ticket_id(task: &TaskSpec, run: &OracleRun) -> String {
    let DomainState::Support(s) = &task.initial_state else {
        return "T-1".to_string();
    };
    let creates = run
        .tool_calls
        .iter()
        .filter(|tc| tc.tool_name == "create_ticket" && !tc.is_explicit_fault)
        .count() as u32;
    format!("T-{}", s.next_ticket_seq + creates)
}
