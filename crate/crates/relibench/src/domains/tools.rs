//! Tool implementations for the four domains.
//!
//! Every tool is a total, pure transition `(state, args) -> (state',
//! result_text)`. Argument problems and domain-level rejections are
//! in-band result texts, never panics or Err values; `Err` is reserved
//! for calls naming a tool the domain does not register at all.
//!
//! Result texts are fixed single-line `key=value` templates so that
//! response-corrupting faults act on a known surface.


use serde_json::Value;

use crate::core::types::{Domain, ToolArgs};
use crate::domains::dates::{parse_date, parse_time, to_iso};
use crate::domains::state::{
    DomainState, OrderItem, OrderRec, Reservation, ReservationStatus, TicketRec, TicketStatus,
};

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("tool {tool} is not registered in domain {domain}")]
    UnknownTool { tool: String, domain: Domain },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    Str,
    Float,
    ListStr,
    /// List of `{sku, qty}` objects (order lines).
    ListItems,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub ty: ParamType,
}

/// Machine-readable tool descriptor, exported to agents for prompt
/// construction and to the model wire protocol.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSpec>,
}

fn p(name: &'static str, ty: ParamType) -> ParamSpec {
    ParamSpec { name, ty }
}

/// The registered tool catalog for a domain.
pub fn catalog(domain: Domain) -> Vec<ToolSpec> {
    use ParamType::*;
    match domain {
        Domain::Scheduling => vec![
            ToolSpec {
                name: "book_meeting",
                description: "Books a meeting on the specified date and time.",
                params: vec![p("date", Str), p("time", Str), p("topic", Str)],
            },
            ToolSpec {
                name: "check_calendar",
                description: "Returns all meetings scheduled for the given date.",
                params: vec![p("date", Str)],
            },
            ToolSpec {
                name: "cancel_meeting",
                description: "Cancels the meeting at the specified slot.",
                params: vec![p("date", Str), p("time", Str)],
            },
            ToolSpec {
                name: "list_meetings",
                description: "Lists all meetings in the date range.",
                params: vec![p("start_date", Str), p("end_date", Str)],
            },
        ],
        Domain::Travel => vec![
            ToolSpec {
                name: "search_flights",
                description: "Searches for available flights.",
                params: vec![p("origin", Str), p("dest", Str), p("date", Str)],
            },
            ToolSpec {
                name: "hold_flight",
                description: "Places a temporary hold on a flight.",
                params: vec![p("flight_id", Str)],
            },
            ToolSpec {
                name: "confirm_booking",
                description: "Confirms a held flight booking.",
                params: vec![p("flight_id", Str), p("passenger", Str), p("payment_info", Str)],
            },
            ToolSpec {
                name: "get_itinerary",
                description: "Returns current reservations.",
                params: vec![],
            },
        ],
        Domain::Support => vec![
            ToolSpec {
                name: "create_ticket",
                description: "Creates a new support ticket.",
                params: vec![
                    p("customer_id", Str),
                    p("subject", Str),
                    p("description", Str),
                    p("priority", Str),
                ],
            },
            ToolSpec {
                name: "update_ticket",
                description: "Updates ticket fields.",
                params: vec![
                    p("ticket_id", Str),
                    p("status", Str),
                    p("priority", Str),
                    p("note", Str),
                ],
            },
            ToolSpec {
                name: "close_ticket",
                description: "Closes a ticket with resolution summary.",
                params: vec![p("ticket_id", Str), p("resolution", Str)],
            },
            ToolSpec {
                name: "escalate_ticket",
                description: "Escalates ticket to higher tier.",
                params: vec![p("ticket_id", Str), p("reason", Str), p("escalate_to", Str)],
            },
            ToolSpec {
                name: "search_knowledge_base",
                description: "Searches KB for relevant articles.",
                params: vec![p("query", Str), p("category", Str)],
            },
            ToolSpec {
                name: "list_open_tickets",
                description: "Lists open tickets with optional filters.",
                params: vec![p("priority", Str), p("customer_id", Str)],
            },
        ],
        Domain::Ecommerce => vec![
            ToolSpec {
                name: "search_products",
                description: "Searches product catalog with filters.",
                params: vec![
                    p("query", Str),
                    p("category", Str),
                    p("min_price", Float),
                    p("max_price", Float),
                ],
            },
            ToolSpec {
                name: "check_inventory",
                description: "Checks inventory for a specific product.",
                params: vec![p("sku", Str)],
            },
            ToolSpec {
                name: "create_order",
                description: "Creates a new order.",
                params: vec![
                    p("customer_id", Str),
                    p("items", ListItems),
                    p("shipping_address", Str),
                    p("coupon_code", Str),
                ],
            },
            ToolSpec {
                name: "check_order_status",
                description: "Returns order details and status.",
                params: vec![p("order_id", Str)],
            },
            ToolSpec {
                name: "process_return",
                description: "Processes a product return.",
                params: vec![
                    p("order_id", Str),
                    p("items", ListStr),
                    p("reason", Str),
                    p("refund_method", Str),
                ],
            },
            ToolSpec {
                name: "apply_coupon",
                description: "Validates and calculates coupon discount.",
                params: vec![p("code", Str), p("order_subtotal", Float)],
            },
        ],
    }
}

/// Tools that never change state.
pub fn is_read_only(tool: &str) -> bool {
    matches!(
        tool,
        "check_calendar"
            | "list_meetings"
            | "search_flights"
            | "get_itinerary"
            | "search_knowledge_base"
            | "list_open_tickets"
            | "search_products"
            | "check_inventory"
            | "check_order_status"
            | "apply_coupon"
    )
}

fn q(s: &str) -> String {
    format!("'{s}'")
}

fn err(reason: &str) -> String {
    format!("status=error reason={reason}")
}

fn err_detail(reason: &str, detail: &str) -> String {
    format!("status=error reason={reason} detail={}", q(detail))
}

fn str_arg(args: &ToolArgs, name: &str) -> Result<String, String> {
    match args.get(name) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(Value::String(_)) | None => Err(err_detail("missing_arg", name)),
        Some(_) => Err(err_detail("bad_arg", name)),
    }
}

/// Like [`str_arg`] but empty/missing maps to "".
fn opt_str_arg(args: &ToolArgs, name: &str) -> Result<String, String> {
    match args.get(name) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.trim().to_string()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(err_detail("bad_arg", name)),
    }
}

fn f64_arg(args: &ToolArgs, name: &str) -> Result<Option<f64>, String> {
    match args.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| err_detail("bad_arg", name)),
        Some(_) => Err(err_detail("bad_arg", name)),
    }
}

fn items_arg(args: &ToolArgs, name: &str) -> Result<Vec<(String, u32)>, String> {
    let v = args.get(name).ok_or_else(|| err_detail("missing_arg", name))?;
    let list = v.as_array().ok_or_else(|| err_detail("bad_arg", name))?;
    let mut out = Vec::new();
    for item in list {
        let obj = item.as_object().ok_or_else(|| err_detail("bad_arg", name))?;
        let sku = obj
            .get("sku")
            .and_then(|s| s.as_str())
            .ok_or_else(|| err_detail("bad_arg", "items.sku"))?;
        let qty = obj
            .get("qty")
            .and_then(|s| s.as_u64())
            .ok_or_else(|| err_detail("bad_arg", "items.qty"))?;
        if qty == 0 {
            return Err(err_detail("bad_arg", "items.qty"));
        }
        out.push((sku.to_string(), qty as u32));
    }
    Ok(out)
}

fn list_str_arg(args: &ToolArgs, name: &str) -> Result<Vec<String>, String> {
    let v = args.get(name).ok_or_else(|| err_detail("missing_arg", name))?;
    match v {
        Value::Array(list) => list
            .iter()
            .map(|s| {
                s.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| err_detail("bad_arg", name))
            })
            .collect(),
        Value::String(s) => Ok(vec![s.clone()]),
        _ => Err(err_detail("bad_arg", name)),
    }
}

fn date_arg(args: &ToolArgs, name: &str) -> Result<String, String> {
    let raw = str_arg(args, name)?;
    parse_date(&raw)
        .map(to_iso)
        .ok_or_else(|| err_detail("bad_date", &raw))
}

fn time_arg(args: &ToolArgs, name: &str) -> Result<String, String> {
    let raw = str_arg(args, name)?;
    parse_time(&raw).ok_or_else(|| err_detail("bad_time", &raw))
}

/// Dispatches one tool call. In-band errors come back as `Ok` with the
/// state unchanged; only an unregistered tool name is an `Err`.
pub fn apply_tool(
    state: &DomainState,
    name: &str,
    args: &ToolArgs,
) -> Result<(DomainState, String), ToolError> {
    let domain = state.domain();
    if !catalog(domain).iter().any(|t| t.name == name) {
        return Err(ToolError::UnknownTool {
            tool: name.to_string(),
            domain,
        });
    }
    let out = match state {
        DomainState::Scheduling(s) => {
            let mut s = s.clone();
            let text = scheduling_tool(&mut s, name, args);
            (DomainState::Scheduling(s), text)
        }
        DomainState::Travel(s) => {
            let mut s = s.clone();
            let text = travel_tool(&mut s, name, args);
            (DomainState::Travel(s), text)
        }
        DomainState::Support(s) => {
            let mut s = s.clone();
            let text = support_tool(&mut s, name, args);
            (DomainState::Support(s), text)
        }
        DomainState::Ecommerce(s) => {
            let mut s = s.clone();
            let text = ecommerce_tool(&mut s, name, args);
            (DomainState::Ecommerce(s), text)
        }
    };
    debug_assert!(out.0.check_invariants().is_ok());
    Ok(out)
}

fn scheduling_tool(
    s: &mut crate::domains::state::SchedulingState,
    name: &str,
    args: &ToolArgs,
) -> String {
    match name {
        "book_meeting" => {
            let (date, time, topic) = match (
                date_arg(args, "date"),
                time_arg(args, "time"),
                str_arg(args, "topic"),
            ) {
                (Ok(d), Ok(t), Ok(topic)) => (d, t, topic),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
            };
            let slots = s.calendar.entry(date.clone()).or_default();
            if let Some(existing) = slots.get(&time) {
                return format!(
                    "status=conflict date={date} time={time} existing_topic={}",
                    q(existing)
                );
            }
            slots.insert(time.clone(), topic.clone());
            format!("status=booked date={date} time={time} topic={}", q(&topic))
        }
        "check_calendar" => {
            let date = match date_arg(args, "date") {
                Ok(d) => d,
                Err(e) => return e,
            };
            let slots = s.calendar.get(&date).cloned().unwrap_or_default();
            let mut out = format!("status=ok date={date} count={}", slots.len());
            for (time, topic) in &slots {
                out.push_str(&format!(" | time={time} topic={}", q(topic)));
            }
            out
        }
        "cancel_meeting" => {
            let (date, time) = match (date_arg(args, "date"), time_arg(args, "time")) {
                (Ok(d), Ok(t)) => (d, t),
                (Err(e), _) | (_, Err(e)) => return e,
            };
            let removed = s
                .calendar
                .get_mut(&date)
                .and_then(|slots| slots.remove(&time));
            if s.calendar.get(&date).is_some_and(|m| m.is_empty()) {
                s.calendar.remove(&date);
            }
            match removed {
                Some(topic) => format!(
                    "status=cancelled date={date} time={time} topic={}",
                    q(&topic)
                ),
                None => err("no_meeting"),
            }
        }
        "list_meetings" => {
            let (start, end) = match (date_arg(args, "start_date"), date_arg(args, "end_date")) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return e,
            };
            let mut rows = Vec::new();
            for (date, slots) in s.calendar.range(start..=end.clone()) {
                for (time, topic) in slots {
                    rows.push(format!("date={date} time={time} topic={}", q(topic)));
                }
            }
            let mut out = format!("status=ok count={}", rows.len());
            for r in rows {
                out.push_str(" | ");
                out.push_str(&r);
            }
            out
        }
        _ => unreachable!("catalog checked"),
    }
}

fn travel_tool(s: &mut crate::domains::state::TravelState, name: &str, args: &ToolArgs) -> String {
    match name {
        "search_flights" => {
            let (origin, dest, date) = match (
                str_arg(args, "origin"),
                str_arg(args, "dest"),
                date_arg(args, "date"),
            ) {
                (Ok(o), Ok(d), Ok(dt)) => (o, d, dt),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
            };
            let mut matches: Vec<_> = s
                .flights_db
                .iter()
                .filter(|f| {
                    f.origin.eq_ignore_ascii_case(&origin)
                        && f.dest.eq_ignore_ascii_case(&dest)
                        && f.date == date
                })
                .collect();
            matches.sort_by(|a, b| a.id.cmp(&b.id));
            if matches.is_empty() {
                return "status=ok count=0 detail='no flights found'".to_string();
            }
            let mut out = format!("status=ok count={}", matches.len());
            for f in matches {
                out.push_str(&format!(
                    " | id={} origin={} dest={} date={} price={:.2} seats_left={}",
                    f.id, f.origin, f.dest, f.date, f.price, f.seats_left
                ));
            }
            out
        }
        "hold_flight" => {
            let id = match str_arg(args, "flight_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let Some(flight) = s.flights_db.iter().find(|f| f.id == id) else {
                return err("unknown_flight");
            };
            if flight.seats_left == 0 {
                return err("sold_out");
            }
            s.holds.insert(id.clone());
            format!("status=held id={id}")
        }
        "confirm_booking" => {
            let id = match str_arg(args, "flight_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let passenger = match opt_str_arg(args, "passenger") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let payment = match opt_str_arg(args, "payment_info") {
                Ok(v) => v,
                Err(e) => return e,
            };
            if !s.holds.contains(&id) {
                return err("no_hold");
            }
            if payment.is_empty() {
                return err("payment_required");
            }
            if passenger.is_empty() {
                return err("passenger_required");
            }
            let flight = s
                .flights_db
                .iter_mut()
                .find(|f| f.id == id)
                .expect("held flight exists");
            if flight.seats_left == 0 {
                return err("sold_out");
            }
            flight.seats_left -= 1;
            let price = flight.price;
            s.holds.remove(&id);
            s.reservations.insert(
                id.clone(),
                Reservation {
                    passenger: passenger.clone(),
                    status: ReservationStatus::Confirmed,
                    payment_info: payment,
                },
            );
            format!(
                "status=confirmed id={id} passenger={} price={price:.2}",
                q(&passenger)
            )
        }
        "get_itinerary" => {
            let mut out = format!("status=ok count={}", s.reservations.len());
            for (id, r) in &s.reservations {
                let st = match r.status {
                    ReservationStatus::Held => "held",
                    ReservationStatus::Confirmed => "confirmed",
                };
                out.push_str(&format!(
                    " | id={id} passenger={} res_status={st}",
                    q(&r.passenger)
                ));
            }
            out
        }
        _ => unreachable!("catalog checked"),
    }
}

fn support_tool(s: &mut crate::domains::state::SupportState, name: &str, args: &ToolArgs) -> String {
    match name {
        "create_ticket" => {
            let (customer, subject, description, priority) = match (
                str_arg(args, "customer_id"),
                str_arg(args, "subject"),
                opt_str_arg(args, "description"),
                str_arg(args, "priority"),
            ) {
                (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
                (Err(e), _, _, _) | (_, Err(e), _, _) | (_, _, Err(e), _) | (_, _, _, Err(e)) => {
                    return e
                }
            };
            s.next_ticket_seq += 1;
            let id = format!("T-{}", s.next_ticket_seq);
            s.tickets.insert(
                id.clone(),
                TicketRec {
                    customer_id: customer,
                    subject,
                    description,
                    priority: priority.clone(),
                    status: TicketStatus::Open,
                    resolution: String::new(),
                    escalate_to: String::new(),
                    escalation_reason: String::new(),
                    notes: Vec::new(),
                },
            );
            format!("status=created ticket_id={id} priority={priority}")
        }
        "update_ticket" => {
            let id = match str_arg(args, "ticket_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let status = match opt_str_arg(args, "status") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let priority = match opt_str_arg(args, "priority") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let note = match opt_str_arg(args, "note") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let Some(ticket) = s.tickets.get_mut(&id) else {
                return err("unknown_ticket");
            };
            match status.as_str() {
                "" => {}
                "open" => ticket.status = TicketStatus::Open,
                "escalated" => ticket.status = TicketStatus::Escalated,
                "closed" => return err("cannot_close_via_update"),
                _ => return err_detail("bad_status", &status),
            }
            if !priority.is_empty() {
                ticket.priority = priority;
            }
            if !note.is_empty() {
                ticket.notes.push(note);
            }
            format!("status=updated ticket_id={id}")
        }
        "close_ticket" => {
            let id = match str_arg(args, "ticket_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let resolution = match opt_str_arg(args, "resolution") {
                Ok(v) => v,
                Err(e) => return e,
            };
            if resolution.is_empty() {
                return err("resolution_required");
            }
            let Some(ticket) = s.tickets.get_mut(&id) else {
                return err("unknown_ticket");
            };
            if ticket.status == TicketStatus::Closed {
                return err("already_closed");
            }
            ticket.status = TicketStatus::Closed;
            ticket.resolution = resolution;
            format!("status=closed ticket_id={id}")
        }
        "escalate_ticket" => {
            let (id, reason, to) = match (
                str_arg(args, "ticket_id"),
                opt_str_arg(args, "reason"),
                str_arg(args, "escalate_to"),
            ) {
                (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
            };
            let Some(ticket) = s.tickets.get_mut(&id) else {
                return err("unknown_ticket");
            };
            if ticket.status == TicketStatus::Closed {
                return err("ticket_closed");
            }
            ticket.status = TicketStatus::Escalated;
            ticket.escalate_to = to.clone();
            ticket.escalation_reason = reason;
            format!("status=escalated ticket_id={id} escalate_to={to}")
        }
        "search_knowledge_base" => {
            let query = match str_arg(args, "query") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let category = match opt_str_arg(args, "category") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let needle = query.to_ascii_lowercase();
            let hits: Vec<_> = s
                .kb
                .iter()
                .filter(|a| {
                    (category.is_empty() || a.category.eq_ignore_ascii_case(&category))
                        && (a.title.to_ascii_lowercase().contains(&needle)
                            || a.body.to_ascii_lowercase().contains(&needle))
                })
                .collect();
            let mut out = format!("status=ok count={}", hits.len());
            for a in hits {
                out.push_str(&format!(
                    " | kb_id={} title={} category={}",
                    a.id,
                    q(&a.title),
                    a.category
                ));
            }
            out
        }
        "list_open_tickets" => {
            let priority = match opt_str_arg(args, "priority") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let customer = match opt_str_arg(args, "customer_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let rows: Vec<_> = s
                .tickets
                .iter()
                .filter(|(_, t)| t.status != TicketStatus::Closed)
                .filter(|(_, t)| priority.is_empty() || t.priority == priority)
                .filter(|(_, t)| customer.is_empty() || t.customer_id == customer)
                .collect();
            let mut out = format!("status=ok count={}", rows.len());
            for (id, t) in rows {
                out.push_str(&format!(
                    " | ticket_id={id} ticket_status={} priority={} customer={}",
                    t.status.as_str(),
                    t.priority,
                    t.customer_id
                ));
            }
            out
        }
        _ => unreachable!("catalog checked"),
    }
}

fn ecommerce_tool(
    s: &mut crate::domains::state::EcommerceState,
    name: &str,
    args: &ToolArgs,
) -> String {
    match name {
        "search_products" => {
            let query = match opt_str_arg(args, "query") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let category = match opt_str_arg(args, "category") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let min_price = match f64_arg(args, "min_price") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let max_price = match f64_arg(args, "max_price") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let needle = query.to_ascii_lowercase();
            let mut hits: Vec<_> = s
                .catalog
                .iter()
                .filter(|pr| {
                    (needle.is_empty() || pr.name.to_ascii_lowercase().contains(&needle))
                        && (category.is_empty() || pr.category.eq_ignore_ascii_case(&category))
                        && min_price.map_or(true, |m| pr.price >= m)
                        && max_price.map_or(true, |m| pr.price <= m)
                })
                .collect();
            hits.sort_by(|a, b| a.sku.cmp(&b.sku));
            let mut out = format!("status=ok count={}", hits.len());
            for pr in hits {
                out.push_str(&format!(
                    " | sku={} name={} category={} price={:.2}",
                    pr.sku,
                    q(&pr.name),
                    pr.category,
                    pr.price
                ));
            }
            out
        }
        "check_inventory" => {
            let sku = match str_arg(args, "sku") {
                Ok(v) => v,
                Err(e) => return e,
            };
            match s.inventory.get(&sku) {
                Some(count) => format!("status=ok sku={sku} count={count}"),
                None => err("unknown_sku"),
            }
        }
        "create_order" => {
            let customer = match str_arg(args, "customer_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let items = match items_arg(args, "items") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let shipping = match str_arg(args, "shipping_address") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let coupon_code = match opt_str_arg(args, "coupon_code") {
                Ok(v) => v,
                Err(e) => return e,
            };
            if items.is_empty() {
                return err("empty_items");
            }
            let mut subtotal = 0.0;
            for (sku, qty) in &items {
                let Some(product) = s.catalog.iter().find(|pr| &pr.sku == sku) else {
                    return err_detail("unknown_sku", sku);
                };
                let have = s.inventory.get(sku).copied().unwrap_or(0);
                if have < *qty {
                    return err_detail("insufficient_inventory", sku);
                }
                subtotal += product.price * *qty as f64;
            }
            let discount = if coupon_code.is_empty() {
                0.0
            } else {
                match s.coupons.get(&coupon_code) {
                    None => return err("invalid_coupon"),
                    Some(c) if subtotal < c.min_subtotal => {
                        return format!(
                            "status=error reason=below_minimum min_subtotal={:.2}",
                            c.min_subtotal
                        )
                    }
                    Some(c) => subtotal * c.discount_pct / 100.0,
                }
            };
            for (sku, qty) in &items {
                *s.inventory.get_mut(sku).expect("checked above") -= qty;
            }
            s.next_order_seq += 1;
            let order_id = format!("O-{}", s.next_order_seq);
            let total = subtotal - discount;
            s.orders.insert(
                order_id.clone(),
                OrderRec {
                    customer_id: customer,
                    items: items
                        .into_iter()
                        .map(|(sku, qty)| OrderItem {
                            sku,
                            qty,
                            returned: false,
                        })
                        .collect(),
                    shipping_address: shipping,
                    coupon_code,
                    subtotal,
                    discount,
                    total,
                    status: "placed".to_string(),
                },
            );
            format!(
                "status=created order_id={order_id} subtotal={subtotal:.2} discount={discount:.2} total={total:.2}"
            )
        }
        "check_order_status" => {
            let id = match str_arg(args, "order_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            match s.orders.get(&id) {
                None => err("unknown_order"),
                Some(o) => {
                    let mut out = format!(
                        "status=ok order_id={id} order_status={} total={:.2} count={}",
                        o.status,
                        o.total,
                        o.items.len()
                    );
                    for item in &o.items {
                        out.push_str(&format!(
                            " | sku={} qty={} returned={}",
                            item.sku, item.qty, item.returned
                        ));
                    }
                    out
                }
            }
        }
        "process_return" => {
            let id = match str_arg(args, "order_id") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let skus = match list_str_arg(args, "items") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let _reason = match opt_str_arg(args, "reason") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let _method = match opt_str_arg(args, "refund_method") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let Some(order) = s.orders.get(&id) else {
                return err("unknown_order");
            };
            for sku in &skus {
                let Some(item) = order.items.iter().find(|it| &it.sku == sku) else {
                    return err_detail("sku_not_in_order", sku);
                };
                if item.returned {
                    return err_detail("already_returned", sku);
                }
            }
            // Validated; now apply.
            let mut refunded = 0.0;
            let order = s.orders.get_mut(&id).expect("checked above");
            let mut restock = Vec::new();
            for sku in &skus {
                let item = order
                    .items
                    .iter_mut()
                    .find(|it| &it.sku == sku)
                    .expect("checked above");
                item.returned = true;
                restock.push((item.sku.clone(), item.qty));
            }
            let all_returned = order.items.iter().all(|it| it.returned);
            if all_returned {
                order.status = "returned".to_string();
            }
            for (sku, qty) in restock {
                let price = s
                    .catalog
                    .iter()
                    .find(|pr| pr.sku == sku)
                    .map(|pr| pr.price)
                    .unwrap_or(0.0);
                refunded += price * qty as f64;
                *s.inventory.entry(sku).or_insert(0) += qty;
            }
            format!("status=returned order_id={id} refunded={refunded:.2}")
        }
        "apply_coupon" => {
            let code = match str_arg(args, "code") {
                Ok(v) => v,
                Err(e) => return e,
            };
            let subtotal = match f64_arg(args, "order_subtotal") {
                Ok(Some(v)) if v >= 0.0 => v,
                Ok(_) => return err_detail("bad_arg", "order_subtotal"),
                Err(e) => return e,
            };
            match s.coupons.get(&code) {
                None => err("invalid_coupon"),
                Some(c) if subtotal < c.min_subtotal => format!(
                    "status=error reason=below_minimum min_subtotal={:.2}",
                    c.min_subtotal
                ),
                Some(c) => {
                    let discount = subtotal * c.discount_pct / 100.0;
                    format!("status=ok code={code} discount={discount:.2}")
                }
            }
        }
        _ => unreachable!("catalog checked"),
    }
}
