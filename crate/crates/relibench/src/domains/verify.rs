//! State-based goal verification: pure predicates over (initial state,
//! final state, verifier params). Verifiers never read transcripts, so
//! two trajectories reaching equal final states get equal verdicts.

use std::collections::BTreeMap;

use crate::core::types::TaskSpec;
use crate::domains::state::{DomainState, ReservationStatus, TicketStatus};

#[derive(Debug, thiserror::Error)]
pub enum VerifierError {
    #[error("unknown verifier id: {0}")]
    UnknownVerifier(String),
    #[error("verifier {verifier} missing param {param}")]
    MissingParam { verifier: String, param: String },
    #[error("state domain mismatch for verifier {0}")]
    DomainMismatch(String),
}

/// Verifier ids registered per domain.
pub fn registered_verifiers(domain: crate::core::types::Domain) -> &'static [&'static str] {
    use crate::core::types::Domain::*;
    match domain {
        Scheduling => &["scheduling_booked", "scheduling_conflict"],
        Travel => &["travel_direct", "travel_cheapest"],
        Support => &["support_create_close", "support_escalate"],
        Ecommerce => &["ecommerce_order", "ecommerce_cheapest_coupon"],
    }
}

fn param<'a>(
    params: &'a BTreeMap<String, String>,
    verifier: &str,
    name: &str,
) -> Result<&'a str, VerifierError> {
    params
        .get(name)
        .map(|s| s.as_str())
        .ok_or_else(|| VerifierError::MissingParam {
            verifier: verifier.to_string(),
            param: name.to_string(),
        })
}

/// Runs the task's verifier over (S0, Sf).
pub fn verify(
    task: &TaskSpec,
    initial: &DomainState,
    fin: &DomainState,
) -> Result<bool, VerifierError> {
    let id = task.verifier_id.as_str();
    let params = &task.verifier_params;
    match id {
        "scheduling_booked" => {
            let (DomainState::Scheduling(_), DomainState::Scheduling(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let date = param(params, id, "date")?;
            let time = param(params, id, "time")?;
            let topic = param(params, id, "topic")?;
            Ok(f.calendar
                .get(date)
                .and_then(|slots| slots.get(time))
                .is_some_and(|t| t == topic))
        }
        "scheduling_conflict" => {
            let (DomainState::Scheduling(_), DomainState::Scheduling(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let date = param(params, id, "date")?;
            let topic = param(params, id, "topic")?;
            let slots: Vec<&str> = param(params, id, "slots")?.split(',').collect();
            let hits = slots
                .iter()
                .filter(|slot| {
                    f.calendar
                        .get(date)
                        .and_then(|m| m.get(**slot))
                        .is_some_and(|t| t == topic)
                })
                .count();
            Ok(hits == 1)
        }
        "travel_direct" => {
            let (DomainState::Travel(_), DomainState::Travel(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let flight_id = param(params, id, "flight_id")?;
            let passenger = param(params, id, "passenger")?;
            Ok(f.reservations.get(flight_id).is_some_and(|r| {
                r.status == ReservationStatus::Confirmed && r.passenger == passenger
            }))
        }
        "travel_cheapest" => {
            let (DomainState::Travel(i), DomainState::Travel(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let origin = param(params, id, "origin")?;
            let dest = param(params, id, "dest")?;
            let date = param(params, id, "date")?;
            let passenger = param(params, id, "passenger")?;
            // Cheapest matching flight in the initial database; ties
            // break by ascending id.
            let cheapest = i
                .flights_db
                .iter()
                .filter(|fl| fl.origin == origin && fl.dest == dest && fl.date == date)
                .min_by(|a, b| {
                    a.price
                        .partial_cmp(&b.price)
                        .unwrap()
                        .then_with(|| a.id.cmp(&b.id))
                });
            let Some(cheapest) = cheapest else {
                return Ok(false);
            };
            Ok(f.reservations.get(&cheapest.id).is_some_and(|r| {
                r.status == ReservationStatus::Confirmed && r.passenger == passenger
            }))
        }
        "support_create_close" => {
            let (DomainState::Support(i), DomainState::Support(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let customer = param(params, id, "customer_id")?;
            let subject = param(params, id, "subject")?;
            Ok(f.tickets.iter().any(|(tid, t)| {
                !i.tickets.contains_key(tid)
                    && t.customer_id == customer
                    && t.subject == subject
                    && t.status == TicketStatus::Closed
                    && !t.resolution.is_empty()
            }))
        }
        "support_escalate" => {
            let (DomainState::Support(_), DomainState::Support(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let ticket_id = param(params, id, "ticket_id")?;
            let escalate_to = param(params, id, "escalate_to")?;
            Ok(f.tickets.get(ticket_id).is_some_and(|t| {
                t.status == TicketStatus::Escalated && t.escalate_to == escalate_to
            }))
        }
        "ecommerce_order" => {
            let (DomainState::Ecommerce(i), DomainState::Ecommerce(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let customer = param(params, id, "customer_id")?;
            let sku = param(params, id, "sku")?;
            let qty: u32 = param(params, id, "qty")?.parse().unwrap_or(0);
            Ok(f.orders.iter().any(|(oid, o)| {
                !i.orders.contains_key(oid)
                    && o.customer_id == customer
                    && o.status == "placed"
                    && o.items
                        .iter()
                        .any(|it| it.sku == sku && it.qty == qty && !it.returned)
            }))
        }
        "ecommerce_cheapest_coupon" => {
            let (DomainState::Ecommerce(i), DomainState::Ecommerce(f)) = (initial, fin) else {
                return Err(VerifierError::DomainMismatch(id.into()));
            };
            let customer = param(params, id, "customer_id")?;
            let category = param(params, id, "category")?;
            let qty: u32 = param(params, id, "qty")?.parse().unwrap_or(0);
            let coupon = param(params, id, "coupon")?;
            let cheapest = i
                .catalog
                .iter()
                .filter(|p| p.category == category)
                .min_by(|a, b| {
                    a.price
                        .partial_cmp(&b.price)
                        .unwrap()
                        .then_with(|| a.sku.cmp(&b.sku))
                });
            let Some(cheapest) = cheapest else {
                return Ok(false);
            };
            Ok(f.orders.iter().any(|(oid, o)| {
                !i.orders.contains_key(oid)
                    && o.customer_id == customer
                    && o.status == "placed"
                    && o.coupon_code == coupon
                    && o.items
                        .iter()
                        .any(|it| it.sku == cheapest.sku && it.qty == qty && !it.returned)
            }))
        }
        other => Err(VerifierError::UnknownVerifier(other.to_string())),
    }
}
