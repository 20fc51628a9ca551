//! Deterministic task suites: five tasks per domain mixing L1/L2
//! complexity, each solvable by the scripted oracle at baseline.

use std::collections::BTreeMap;

use crate::core::types::{Complexity, Domain, GoalMeta, TaskSpec};
use crate::domains::state::{
    Coupon, DomainState, EcommerceState, FlightRec, KbArticle, ProductRec, SchedulingState,
    SupportState, TicketRec, TicketStatus, TravelState,
};
use crate::domains::tools::catalog;
use crate::domains::verify::registered_verifiers;

fn tool_names(domain: Domain) -> Vec<String> {
    catalog(domain).iter().map(|t| t.name.to_string()).collect()
}

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn task(
    id: &str,
    domain: Domain,
    complexity: Complexity,
    description: &str,
    initial_state: DomainState,
    verifier_id: &str,
    verifier_params: &[(&str, &str)],
    goal: GoalMeta,
) -> TaskSpec {
    TaskSpec {
        task_id: id.to_string(),
        domain,
        description: description.to_string(),
        complexity,
        initial_state,
        tool_set: tool_names(domain),
        verifier_id: verifier_id.to_string(),
        verifier_params: params(verifier_params),
        goal_meta: goal,
    }
}

fn scheduling_state(slots: &[(&str, &str, &str)]) -> DomainState {
    let mut s = SchedulingState::default();
    for (date, time, topic) in slots {
        s.calendar
            .entry(date.to_string())
            .or_default()
            .insert(time.to_string(), topic.to_string());
    }
    DomainState::Scheduling(s)
}

fn scheduling_suite() -> Vec<TaskSpec> {
    vec![
        task(
            "sched-01",
            Domain::Scheduling,
            Complexity::L1,
            "Book a meeting about 'Review' on 2026-01-01 at 09:00.",
            scheduling_state(&[]),
            "scheduling_booked",
            &[("date", "2026-01-01"), ("time", "09:00"), ("topic", "Review")],
            GoalMeta::new()
                .with("date", "2026-01-01")
                .with("time", "09:00")
                .with("topic", "Review"),
        ),
        task(
            "sched-02",
            Domain::Scheduling,
            Complexity::L1,
            "Book a meeting about 'Planning' on 2026-01-02 at 14:00.",
            scheduling_state(&[]),
            "scheduling_booked",
            &[("date", "2026-01-02"), ("time", "14:00"), ("topic", "Planning")],
            GoalMeta::new()
                .with("date", "2026-01-02")
                .with("time", "14:00")
                .with("topic", "Planning"),
        ),
        task(
            "sched-03",
            Domain::Scheduling,
            Complexity::L1,
            "Book a meeting about 'Standup' on 2026-01-03 at 10:00.",
            scheduling_state(&[("2026-01-03", "15:00", "Retro")]),
            "scheduling_booked",
            &[("date", "2026-01-03"), ("time", "10:00"), ("topic", "Standup")],
            GoalMeta::new()
                .with("date", "2026-01-03")
                .with("time", "10:00")
                .with("topic", "Standup"),
        ),
        task(
            "sched-04",
            Domain::Scheduling,
            Complexity::L2,
            "Book a meeting about 'Budget' on 2026-01-04 at 09:00. If that slot is already taken, book it at 11:00 instead.",
            scheduling_state(&[("2026-01-04", "09:00", "Sync")]),
            "scheduling_conflict",
            &[
                ("date", "2026-01-04"),
                ("topic", "Budget"),
                ("slots", "09:00,11:00"),
            ],
            GoalMeta::new()
                .with("date", "2026-01-04")
                .with("time", "09:00")
                .with("fallback_time", "11:00")
                .with("topic", "Budget"),
        ),
        task(
            "sched-05",
            Domain::Scheduling,
            Complexity::L2,
            "Book a meeting about 'Demo' on 2026-01-06 at 10:00. If that slot is already taken, book it at 13:00 instead.",
            scheduling_state(&[("2026-01-06", "10:00", "Interview")]),
            "scheduling_conflict",
            &[
                ("date", "2026-01-06"),
                ("topic", "Demo"),
                ("slots", "10:00,13:00"),
            ],
            GoalMeta::new()
                .with("date", "2026-01-06")
                .with("time", "10:00")
                .with("fallback_time", "13:00")
                .with("topic", "Demo"),
        ),
    ]
}

fn flight(id: &str, origin: &str, dest: &str, date: &str, price: f64, seats: u32) -> FlightRec {
    FlightRec {
        id: id.to_string(),
        origin: origin.to_string(),
        dest: dest.to_string(),
        date: date.to_string(),
        price,
        seats_left: seats,
    }
}

fn travel_state(flights: Vec<FlightRec>) -> DomainState {
    DomainState::Travel(TravelState {
        flights_db: flights,
        ..TravelState::default()
    })
}

fn travel_suite() -> Vec<TaskSpec> {
    let lon_par = || {
        vec![
            flight("BA-200", "LON", "PAR", "2026-01-05", 500.0, 10),
            flight("AA-500", "LON", "PAR", "2026-01-05", 300.0, 10),
        ]
    };
    vec![
        task(
            "travel-01",
            Domain::Travel,
            Complexity::L2,
            "Book the cheapest flight from LON to PAR on 2026-01-05 for Bob.",
            travel_state(lon_par()),
            "travel_cheapest",
            &[
                ("origin", "LON"),
                ("dest", "PAR"),
                ("date", "2026-01-05"),
                ("passenger", "Bob"),
            ],
            GoalMeta::new()
                .with("origin", "LON")
                .with("dest", "PAR")
                .with("date", "2026-01-05")
                .with("passenger", "Bob")
                .with("_mode", "cheapest"),
        ),
        task(
            "travel-02",
            Domain::Travel,
            Complexity::L1,
            "Book flight BA-200 from LON to PAR on 2026-01-05 for Alice.",
            travel_state(lon_par()),
            "travel_direct",
            &[("flight_id", "BA-200"), ("passenger", "Alice")],
            GoalMeta::new()
                .with("flight_id", "BA-200")
                .with("origin", "LON")
                .with("dest", "PAR")
                .with("date", "2026-01-05")
                .with("passenger", "Alice"),
        ),
        task(
            "travel-03",
            Domain::Travel,
            Complexity::L1,
            "Book flight UA-100 from NYC to SFO on 2026-01-07 for Carol.",
            travel_state(vec![
                flight("UA-100", "NYC", "SFO", "2026-01-07", 420.0, 5),
                flight("DL-300", "NYC", "SFO", "2026-01-07", 380.0, 3),
            ]),
            "travel_direct",
            &[("flight_id", "UA-100"), ("passenger", "Carol")],
            GoalMeta::new()
                .with("flight_id", "UA-100")
                .with("origin", "NYC")
                .with("dest", "SFO")
                .with("date", "2026-01-07")
                .with("passenger", "Carol"),
        ),
        task(
            "travel-04",
            Domain::Travel,
            Complexity::L2,
            "Book the cheapest flight from BER to ROM on 2026-01-08 for Dana.",
            travel_state(vec![
                flight("LH-410", "BER", "ROM", "2026-01-08", 250.0, 4),
                flight("AZ-610", "BER", "ROM", "2026-01-08", 210.0, 6),
                flight("EZ-111", "BER", "ROM", "2026-01-08", 190.0, 9),
            ]),
            "travel_cheapest",
            &[
                ("origin", "BER"),
                ("dest", "ROM"),
                ("date", "2026-01-08"),
                ("passenger", "Dana"),
            ],
            GoalMeta::new()
                .with("origin", "BER")
                .with("dest", "ROM")
                .with("date", "2026-01-08")
                .with("passenger", "Dana")
                .with("_mode", "cheapest"),
        ),
        task(
            "travel-05",
            Domain::Travel,
            Complexity::L1,
            "Book flight QF-700 from SYD to AKL on 2026-01-09 for Erin.",
            travel_state(vec![
                flight("QF-700", "SYD", "AKL", "2026-01-09", 310.0, 12),
                flight("NZ-101", "SYD", "AKL", "2026-01-09", 280.0, 7),
            ]),
            "travel_direct",
            &[("flight_id", "QF-700"), ("passenger", "Erin")],
            GoalMeta::new()
                .with("flight_id", "QF-700")
                .with("origin", "SYD")
                .with("dest", "AKL")
                .with("date", "2026-01-09")
                .with("passenger", "Erin"),
        ),
    ]
}

fn base_kb() -> Vec<KbArticle> {
    let art = |id: &str, title: &str, category: &str, body: &str| KbArticle {
        id: id.to_string(),
        title: title.to_string(),
        category: category.to_string(),
        body: body.to_string(),
    };
    vec![
        art(
            "KB-1",
            "Refund policy",
            "billing",
            "Refunds over 100 units require tier2 approval.",
        ),
        art(
            "KB-2",
            "Password reset steps",
            "account",
            "Locked accounts need a security review before reset.",
        ),
        art(
            "KB-3",
            "Shipping delays",
            "logistics",
            "Courier delays are credited after 5 business days.",
        ),
    ]
}

fn support_state(tickets: Vec<(&str, TicketRec)>, next_seq: u32) -> DomainState {
    DomainState::Support(SupportState {
        tickets: tickets
            .into_iter()
            .map(|(id, t)| (id.to_string(), t))
            .collect(),
        kb: base_kb(),
        next_ticket_seq: next_seq,
    })
}

fn open_ticket(customer: &str, subject: &str, priority: &str) -> TicketRec {
    TicketRec {
        customer_id: customer.to_string(),
        subject: subject.to_string(),
        description: String::new(),
        priority: priority.to_string(),
        status: TicketStatus::Open,
        resolution: String::new(),
        escalate_to: String::new(),
        escalation_reason: String::new(),
        notes: Vec::new(),
    }
}

fn support_suite() -> Vec<TaskSpec> {
    vec![
        task(
            "support-01",
            Domain::Support,
            Complexity::L1,
            "Create a ticket for customer C-100 about 'Login failure' with priority high, then close it with resolution 'Password reset'.",
            support_state(vec![], 0),
            "support_create_close",
            &[("customer_id", "C-100"), ("subject", "Login failure")],
            GoalMeta::new()
                .with("customer_id", "C-100")
                .with("subject", "Login failure")
                .with("priority", "high")
                .with("resolution", "Password reset"),
        ),
        task(
            "support-02",
            Domain::Support,
            Complexity::L1,
            "Create a ticket for customer C-101 about 'Broken screen' with priority medium, then close it with resolution 'Replacement sent'.",
            support_state(vec![], 0),
            "support_create_close",
            &[("customer_id", "C-101"), ("subject", "Broken screen")],
            GoalMeta::new()
                .with("customer_id", "C-101")
                .with("subject", "Broken screen")
                .with("priority", "medium")
                .with("resolution", "Replacement sent"),
        ),
        task(
            "support-03",
            Domain::Support,
            Complexity::L2,
            "Search the knowledge base for 'refund policy', then escalate ticket T-1 to tier2 with reason 'Refund exceeds limit'.",
            support_state(
                vec![("T-1", open_ticket("C-102", "Refund request", "high"))],
                1,
            ),
            "support_escalate",
            &[("ticket_id", "T-1"), ("escalate_to", "tier2")],
            GoalMeta::new()
                .with("ticket_id", "T-1")
                .with("escalate_to", "tier2")
                .with("query", "refund policy")
                .with("reason", "Refund exceeds limit"),
        ),
        task(
            "support-04",
            Domain::Support,
            Complexity::L2,
            "Search the knowledge base for 'password reset', then escalate ticket T-1 to tier3 with reason 'Security review needed'.",
            support_state(
                vec![("T-1", open_ticket("C-103", "Account locked", "high"))],
                1,
            ),
            "support_escalate",
            &[("ticket_id", "T-1"), ("escalate_to", "tier3")],
            GoalMeta::new()
                .with("ticket_id", "T-1")
                .with("escalate_to", "tier3")
                .with("query", "password reset")
                .with("reason", "Security review needed"),
        ),
        task(
            "support-05",
            Domain::Support,
            Complexity::L1,
            "Create a ticket for customer C-104 about 'Late delivery' with priority low, then close it with resolution 'Courier rescheduled'.",
            support_state(vec![], 0),
            "support_create_close",
            &[("customer_id", "C-104"), ("subject", "Late delivery")],
            GoalMeta::new()
                .with("customer_id", "C-104")
                .with("subject", "Late delivery")
                .with("priority", "low")
                .with("resolution", "Courier rescheduled"),
        ),
    ]
}

fn base_catalog() -> (Vec<ProductRec>, BTreeMap<String, u32>, BTreeMap<String, Coupon>) {
    let product = |sku: &str, name: &str, category: &str, price: f64| ProductRec {
        sku: sku.to_string(),
        name: name.to_string(),
        category: category.to_string(),
        price,
    };
    let catalog = vec![
        product("SKU-100", "Blue Widget", "widgets", 9.99),
        product("SKU-101", "Red Widget", "widgets", 7.49),
        product("SKU-102", "Green Widget", "widgets", 12.99),
        product("SKU-200", "Mini Gadget", "gadgets", 19.99),
        product("SKU-201", "Pro Gadget", "gadgets", 49.99),
    ];
    let inventory = catalog.iter().map(|p| (p.sku.clone(), 25u32)).collect();
    let mut coupons = BTreeMap::new();
    coupons.insert(
        "SAVE10".to_string(),
        Coupon {
            discount_pct: 10.0,
            min_subtotal: 0.0,
        },
    );
    coupons.insert(
        "SAVE20".to_string(),
        Coupon {
            discount_pct: 20.0,
            min_subtotal: 50.0,
        },
    );
    (catalog, inventory, coupons)
}

fn ecommerce_state() -> DomainState {
    let (catalog, inventory, coupons) = base_catalog();
    DomainState::Ecommerce(EcommerceState {
        catalog,
        inventory,
        orders: BTreeMap::new(),
        coupons,
        next_order_seq: 0,
    })
}

fn ecommerce_suite() -> Vec<TaskSpec> {
    vec![
        task(
            "ecom-01",
            Domain::Ecommerce,
            Complexity::L1,
            "Order 2 units of SKU-100 for customer C-200, shipping to '42 Elm St'.",
            ecommerce_state(),
            "ecommerce_order",
            &[("customer_id", "C-200"), ("sku", "SKU-100"), ("qty", "2")],
            GoalMeta::new()
                .with("customer_id", "C-200")
                .with("sku", "SKU-100")
                .with("qty", "2")
                .with("address", "42 Elm St"),
        ),
        task(
            "ecom-02",
            Domain::Ecommerce,
            Complexity::L1,
            "Order 1 unit of SKU-201 for customer C-201, shipping to '7 Oak Ave'.",
            ecommerce_state(),
            "ecommerce_order",
            &[("customer_id", "C-201"), ("sku", "SKU-201"), ("qty", "1")],
            GoalMeta::new()
                .with("customer_id", "C-201")
                .with("sku", "SKU-201")
                .with("qty", "1")
                .with("address", "7 Oak Ave"),
        ),
        task(
            "ecom-03",
            Domain::Ecommerce,
            Complexity::L2,
            "Find the cheapest product in the widgets category and order 1 unit of it for customer C-202 using coupon SAVE10, shipping to '9 Pine Rd'.",
            ecommerce_state(),
            "ecommerce_cheapest_coupon",
            &[
                ("customer_id", "C-202"),
                ("category", "widgets"),
                ("qty", "1"),
                ("coupon", "SAVE10"),
            ],
            GoalMeta::new()
                .with("customer_id", "C-202")
                .with("category", "widgets")
                .with("qty", "1")
                .with("coupon", "SAVE10")
                .with("address", "9 Pine Rd")
                .with("_mode", "cheapest"),
        ),
        task(
            "ecom-04",
            Domain::Ecommerce,
            Complexity::L2,
            "Find the cheapest product in the gadgets category and order 2 units of it for customer C-203 using coupon SAVE10, shipping to '3 Birch Ln'.",
            ecommerce_state(),
            "ecommerce_cheapest_coupon",
            &[
                ("customer_id", "C-203"),
                ("category", "gadgets"),
                ("qty", "2"),
                ("coupon", "SAVE10"),
            ],
            GoalMeta::new()
                .with("customer_id", "C-203")
                .with("category", "gadgets")
                .with("qty", "2")
                .with("coupon", "SAVE10")
                .with("address", "3 Birch Ln")
                .with("_mode", "cheapest"),
        ),
        task(
            "ecom-05",
            Domain::Ecommerce,
            Complexity::L1,
            "Order 3 units of SKU-102 for customer C-204, shipping to '12 Maple Dr'.",
            ecommerce_state(),
            "ecommerce_order",
            &[("customer_id", "C-204"), ("sku", "SKU-102"), ("qty", "3")],
            GoalMeta::new()
                .with("customer_id", "C-204")
                .with("sku", "SKU-102")
                .with("qty", "3")
                .with("address", "12 Maple Dr"),
        ),
    ]
}

/// Five tasks for one domain. Deterministic under seed (the shipped
/// suites are fixed; the seed is reserved for future variants).
pub fn generate_task_suite(domain: Domain, _seed: u64) -> Vec<TaskSpec> {
    let suite = match domain {
        Domain::Scheduling => scheduling_suite(),
        Domain::Travel => travel_suite(),
        Domain::Support => support_suite(),
        Domain::Ecommerce => ecommerce_suite(),
    };
    debug_assert!(suite.iter().all(|t| validate_task(t).is_ok()));
    suite
}

/// The full 20-task suite across all four domains.
pub fn all_task_suites(seed: u64) -> Vec<TaskSpec> {
    Domain::ALL
        .iter()
        .flat_map(|&d| generate_task_suite(d, seed))
        .collect()
}

/// TaskSpec invariants: verifier and tools registered, goal entities
/// present in the baseline description.
pub fn validate_task(task: &TaskSpec) -> Result<(), String> {
    if !registered_verifiers(task.domain).contains(&task.verifier_id.as_str()) {
        return Err(format!(
            "verifier {} not registered for {}",
            task.verifier_id, task.domain
        ));
    }
    let names: Vec<_> = catalog(task.domain).iter().map(|t| t.name).collect();
    for t in &task.tool_set {
        if !names.contains(&t.as_str()) {
            return Err(format!("tool {t} not registered for {}", task.domain));
        }
    }
    if task.initial_state.domain() != task.domain {
        return Err("initial state domain mismatch".to_string());
    }
    task.initial_state.check_invariants()?;
    for (key, value) in task.goal_meta.entities() {
        if !crate::metamorph::extract::entity_present(&task.description, value) {
            return Err(format!("goal entity {key}={value} absent from description"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_tasks_all_valid() {
        let tasks = all_task_suites(1);
        assert_eq!(tasks.len(), 20);
        for t in &tasks {
            validate_task(t).unwrap_or_else(|e| panic!("{}: {e}", t.task_id));
        }
    }

    #[test]
    fn same_seed_identical_suites() {
        assert_eq!(all_task_suites(7), all_task_suites(7));
    }

    #[test]
    fn scheduling_first_task_is_the_review_booking() {
        let suite = generate_task_suite(Domain::Scheduling, 0);
        assert_eq!(
            suite[0].description,
            "Book a meeting about 'Review' on 2026-01-01 at 09:00."
        );
        assert_eq!(suite[0].complexity, Complexity::L1);
    }

    #[test]
    fn travel_suite_contains_cheapest_lon_par() {
        let suite = generate_task_suite(Domain::Travel, 0);
        assert!(suite.iter().any(|t| t.description
            == "Book the cheapest flight from LON to PAR on 2026-01-05 for Bob."));
    }

    #[test]
    fn complexity_mix_per_domain() {
        for d in Domain::ALL {
            let suite = generate_task_suite(d, 0);
            assert!(suite.iter().any(|t| t.complexity == Complexity::L1));
            assert!(suite.iter().any(|t| t.complexity == Complexity::L2));
        }
    }
}
