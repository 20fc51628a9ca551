//! Per-domain world state. Each state is owned by exactly one episode;
//! tools are pure transitions over it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::core::types::Domain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRec {
    pub id: String,
    pub origin: String,
    pub dest: String,
    pub date: String,
    pub price: f64,
    pub seats_left: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReservationStatus {
    Held,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservation {
    pub passenger: String,
    pub status: ReservationStatus,
    pub payment_info: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TicketStatus {
    Open,
    Escalated,
    Closed,
}

impl TicketStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TicketStatus::Open => "open",
            TicketStatus::Escalated => "escalated",
            TicketStatus::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicketRec {
    pub customer_id: String,
    pub subject: String,
    pub description: String,
    pub priority: String,
    pub status: TicketStatus,
    #[serde(default)]
    pub resolution: String,
    #[serde(default)]
    pub escalate_to: String,
    #[serde(default)]
    pub escalation_reason: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbArticle {
    pub id: String,
    pub title: String,
    pub category: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRec {
    pub sku: String,
    pub name: String,
    pub category: String,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderItem {
    pub sku: String,
    pub qty: u32,
    #[serde(default)]
    pub returned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRec {
    pub customer_id: String,
    pub items: Vec<OrderItem>,
    pub shipping_address: String,
    #[serde(default)]
    pub coupon_code: String,
    pub subtotal: f64,
    pub discount: f64,
    pub total: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupon {
    pub discount_pct: f64,
    pub min_subtotal: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchedulingState {
    /// date (ISO) -> time (HH:MM) -> topic; at most one topic per slot.
    pub calendar: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TravelState {
    pub flights_db: Vec<FlightRec>,
    pub holds: BTreeSet<String>,
    pub reservations: BTreeMap<String, Reservation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SupportState {
    pub tickets: BTreeMap<String, TicketRec>,
    pub kb: Vec<KbArticle>,
    pub next_ticket_seq: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EcommerceState {
    pub catalog: Vec<ProductRec>,
    pub inventory: BTreeMap<String, u32>,
    pub orders: BTreeMap<String, OrderRec>,
    pub coupons: BTreeMap<String, Coupon>,
    pub next_order_seq: u32,
}

/// Tagged union of the four domain states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum DomainState {
    Scheduling(SchedulingState),
    Travel(TravelState),
    Support(SupportState),
    Ecommerce(EcommerceState),
}

impl DomainState {
    pub fn domain(&self) -> Domain {
        match self {
            DomainState::Scheduling(_) => Domain::Scheduling,
            DomainState::Travel(_) => Domain::Travel,
            DomainState::Support(_) => Domain::Support,
            DomainState::Ecommerce(_) => Domain::Ecommerce,
        }
    }

    pub fn empty(domain: Domain) -> Self {
        match domain {
            Domain::Scheduling => DomainState::Scheduling(SchedulingState::default()),
            Domain::Travel => DomainState::Travel(TravelState::default()),
            Domain::Support => DomainState::Support(SupportState::default()),
            Domain::Ecommerce => DomainState::Ecommerce(EcommerceState::default()),
        }
    }

    /// Structural invariants each tool transition must preserve.
    pub fn check_invariants(&self) -> Result<(), String> {
        match self {
            DomainState::Scheduling(_) => Ok(()), // one topic per slot by map shape
            DomainState::Travel(s) => {
                let ids: BTreeSet<_> = s.flights_db.iter().map(|f| f.id.as_str()).collect();
                for f in &s.flights_db {
                    if f.price <= 0.0 {
                        return Err(format!("flight {} has non-positive price", f.id));
                    }
                }
                for (id, r) in &s.reservations {
                    if !ids.contains(id.as_str()) {
                        return Err(format!("reservation for unknown flight {id}"));
                    }
                    if r.status == ReservationStatus::Confirmed && r.passenger.is_empty() {
                        return Err(format!("confirmed reservation {id} without passenger"));
                    }
                }
                Ok(())
            }
            DomainState::Support(s) => {
                for (id, t) in &s.tickets {
                    if t.status == TicketStatus::Closed && t.resolution.is_empty() {
                        return Err(format!("closed ticket {id} without resolution"));
                    }
                }
                Ok(())
            }
            DomainState::Ecommerce(s) => {
                let skus: BTreeSet<_> = s.catalog.iter().map(|p| p.sku.as_str()).collect();
                for (id, o) in &s.orders {
                    for item in &o.items {
                        if !skus.contains(item.sku.as_str()) {
                            return Err(format!("order {id} references unknown sku {}", item.sku));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}
