//! Offline stand-in for a chat model: a competent deterministic policy
//! that executes the canonical plan for a task through the regular
//! ModelClient interface, including retries against recoverable
//! faults. Lets the full agent loops (ReAct, Reflexion) run end to end
//! without network access.

use serde_json::json;

use crate::agents::client::{
    estimate_tokens, ClientError, ModelAction, ModelClient, ModelRequest, ModelResponse,
};
use crate::agents::oracle::{is_faulty, is_hard_limit, parse_token};
use crate::core::types::{TaskSpec, ToolArgs};
use crate::domains::state::DomainState;

/// One planned tool invocation. `CloseTicket` resolves its ticket id
/// at emission time from the preceding create_ticket result.
#[derive(Debug, Clone)]
enum PlanStep {
    Call {
        tool: &'static str,
        args: ToolArgs,
    },
    /// Book at `time`, switching to `fallback_time` on a slot conflict.
    BookWithFallback {
        date: String,
        time: String,
        fallback_time: String,
        topic: String,
    },
    CloseTicket {
        resolution: String,
    },
}

fn args(pairs: Vec<(&str, serde_json::Value)>) -> ToolArgs {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Canonical plan for a task, derived from goal metadata and the
/// initial state — never from the (possibly perturbed) description.
fn build_plan(task: &TaskSpec) -> Vec<PlanStep> {
    let g = |k: &str| task.goal_meta.get(k).unwrap_or_default().to_string();
    match task.verifier_id.as_str() {
        "scheduling_booked" => vec![PlanStep::Call {
            tool: "book_meeting",
            args: args(vec![
                ("date", json!(g("date"))),
                ("time", json!(g("time"))),
                ("topic", json!(g("topic"))),
            ]),
        }],
        "scheduling_conflict" => vec![PlanStep::BookWithFallback {
            date: g("date"),
            time: g("time"),
            fallback_time: g("fallback_time"),
            topic: g("topic"),
        }],
        "travel_direct" | "travel_cheapest" => {
            let flight_id = if task.verifier_id == "travel_direct" {
                g("flight_id")
            } else {
                let DomainState::Travel(t) = &task.initial_state else {
                    return Vec::new();
                };
                match t
                    .flights_db
                    .iter()
                    .filter(|f| {
                        f.origin == g("origin") && f.dest == g("dest") && f.date == g("date")
                    })
                    .min_by(|a, b| {
                        a.price.partial_cmp(&b.price).unwrap().then_with(|| a.id.cmp(&b.id))
                    }) {
                    Some(f) => f.id.clone(),
                    None => return Vec::new(),
                }
            };
            vec![
                PlanStep::Call {
                    tool: "search_flights",
                    args: args(vec![
                        ("origin", json!(g("origin"))),
                        ("dest", json!(g("dest"))),
                        ("date", json!(g("date"))),
                    ]),
                },
                PlanStep::Call {
                    tool: "hold_flight",
                    args: args(vec![("flight_id", json!(flight_id))]),
                },
                PlanStep::Call {
                    tool: "confirm_booking",
                    args: args(vec![
                        ("flight_id", json!(flight_id)),
                        ("passenger", json!(g("passenger"))),
                        ("payment_info", json!("card-0000")),
                    ]),
                },
            ]
        }
        "support_create_close" => vec![
            PlanStep::Call {
                tool: "create_ticket",
                args: args(vec![
                    ("customer_id", json!(g("customer_id"))),
                    ("subject", json!(g("subject"))),
                    ("description", json!("")),
                    ("priority", json!(g("priority"))),
                ]),
            },
            PlanStep::CloseTicket {
                resolution: g("resolution"),
            },
        ],
        "support_escalate" => vec![
            PlanStep::Call {
                tool: "search_knowledge_base",
                args: args(vec![("query", json!(g("query"))), ("category", json!(""))]),
            },
            PlanStep::Call {
                tool: "escalate_ticket",
                args: args(vec![
                    ("ticket_id", json!(g("ticket_id"))),
                    ("reason", json!(g("reason"))),
                    ("escalate_to", json!(g("escalate_to"))),
                ]),
            },
        ],
        "ecommerce_order" => {
            let qty: u32 = g("qty").parse().unwrap_or(1);
            vec![PlanStep::Call {
                tool: "create_order",
                args: args(vec![
                    ("customer_id", json!(g("customer_id"))),
                    ("items", json!([{ "sku": g("sku"), "qty": qty }])),
                    ("shipping_address", json!(g("address"))),
                    ("coupon_code", json!("")),
                ]),
            }]
        }
        "ecommerce_cheapest_coupon" => {
            let DomainState::Ecommerce(e) = &task.initial_state else {
                return Vec::new();
            };
            let Some(best) = e
                .catalog
                .iter()
                .filter(|p| p.category == g("category"))
                .min_by(|a, b| {
                    a.price.partial_cmp(&b.price).unwrap().then_with(|| a.sku.cmp(&b.sku))
                })
            else {
                return Vec::new();
            };
            let qty: u32 = g("qty").parse().unwrap_or(1);
            vec![
                PlanStep::Call {
                    tool: "search_products",
                    args: args(vec![("query", json!("")), ("category", json!(g("category")))]),
                },
                PlanStep::Call {
                    tool: "apply_coupon",
                    args: args(vec![
                        ("code", json!(g("coupon"))),
                        ("order_subtotal", json!(best.price * qty as f64)),
                    ]),
                },
                PlanStep::Call {
                    tool: "create_order",
                    args: args(vec![
                        ("customer_id", json!(g("customer_id"))),
                        ("items", json!([{ "sku": best.sku, "qty": qty }])),
                        ("shipping_address", json!(g("address"))),
                        ("coupon_code", json!(g("coupon"))),
                    ]),
                },
            ]
        }
        _ => Vec::new(),
    }
}

/// Retries per plan step before declaring failure. The agent loop's
/// own turn budget still caps the episode overall.
const MAX_STEP_RETRIES: u32 = 3;

/// Deterministic policy client. State machine over the plan: emit the
/// current step's call, inspect the tool result on the next request,
/// retry recoverable faults, and finish when the plan is done.
pub struct StubPolicyClient {
    task: TaskSpec,
    plan: Vec<PlanStep>,
    cursor: usize,
    retries_used: u32,
    /// True after emitting a call whose result we have not yet seen.
    awaiting_result: bool,
    /// The fallback slot is pending for the current BookWithFallback.
    conflict_pending: bool,
    /// Ticket id parsed from the last clean create_ticket result.
    ticket_id: Option<String>,
    successful_creates: u32,
}

impl StubPolicyClient {
    pub fn new(task: &TaskSpec) -> Self {
        StubPolicyClient {
            plan: build_plan(task),
            task: task.clone(),
            cursor: 0,
            retries_used: 0,
            awaiting_result: false,
            conflict_pending: false,
            ticket_id: None,
            successful_creates: 0,
        }
    }

    fn predicted_ticket_id(&self) -> String {
        let DomainState::Support(s) = &self.task.initial_state else {
            return "T-1".to_string();
        };
        format!("T-{}", s.next_ticket_seq + self.successful_creates.max(1))
    }

    fn emit(&mut self) -> ModelAction {
        let Some(step) = self.plan.get(self.cursor) else {
            return ModelAction::Finish {
                text: "done".to_string(),
            };
        };
        self.awaiting_result = true;
        match step {
            PlanStep::Call { tool, args } => ModelAction::ToolCall {
                name: tool.to_string(),
                args: args.clone(),
            },
            PlanStep::BookWithFallback {
                date,
                time,
                fallback_time,
                topic,
            } => {
                let slot = if self.conflict_pending { fallback_time } else { time };
                ModelAction::ToolCall {
                    name: "book_meeting".to_string(),
                    args: args(vec![
                        ("date", json!(date)),
                        ("time", json!(slot)),
                        ("topic", json!(topic)),
                    ]),
                }
            }
            PlanStep::CloseTicket { resolution } => {
                let ticket_id = self
                    .ticket_id
                    .clone()
                    .unwrap_or_else(|| self.predicted_ticket_id());
                ModelAction::ToolCall {
                    name: "close_ticket".to_string(),
                    args: args(vec![
                        ("ticket_id", json!(ticket_id)),
                        ("resolution", json!(resolution)),
                    ]),
                }
            }
        }
    }

    fn advance(&mut self) {
        self.cursor += 1;
        self.retries_used = 0;
        self.conflict_pending = false;
    }

    /// Decides the next action given the latest tool observation (the
    /// last `tool` turn, present unless a reflection just happened).
    fn decide(&mut self, last_tool: Option<&str>) -> ModelAction {
        let Some(result) = last_tool.filter(|_| self.awaiting_result) else {
            // Fresh segment (episode start or post-reflection): retry
            // the current step with a fresh retry budget.
            self.retries_used = 0;
            return self.emit();
        };
        self.awaiting_result = false;
        if is_hard_limit(result) {
            return ModelAction::Finish {
                text: "cannot complete: the required tool is quota-limited".to_string(),
            };
        }
        if is_faulty(result) {
            if self.retries_used < MAX_STEP_RETRIES {
                self.retries_used += 1;
                return self.emit();
            }
            return ModelAction::Finish {
                text: "unable to complete the task: repeated tool failures".to_string(),
            };
        }
        // Clean observation for the current step.
        match self.plan.get(self.cursor) {
            Some(PlanStep::BookWithFallback { .. })
                if result.contains("status=conflict") && !self.conflict_pending =>
            {
                self.conflict_pending = true;
                return self.emit();
            }
            Some(PlanStep::Call { tool, .. }) if *tool == "create_ticket" => {
                self.successful_creates += 1;
                self.ticket_id = parse_token(result, &["ticket_id", "case_id"]);
            }
            _ => {}
        }
        self.advance();
        self.emit()
    }
}

impl ModelClient for StubPolicyClient {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError> {
        let last_tool = request
            .messages
            .last()
            .filter(|t| t.role == "tool")
            .map(|t| t.content.as_str());
        let action = self.decide(last_tool);
        let in_len: usize =
            request.system.len() + request.messages.iter().map(|t| t.content.len()).sum::<usize>();
        Ok(ModelResponse {
            tokens_out: estimate_tokens(action.render().len()),
            tokens_in: estimate_tokens(in_len),
            action,
        })
    }
}
