//! Rule-based entity extraction: the oracle that checks every goal
//! entity is still recoverable from a (possibly perturbed) description.

use crate::core::types::GoalMeta;
use crate::domains::dates::{parse_date, scan_dates};

/// Whether one entity value is recoverable from the text. Dates match
/// in any accepted surface form (including relative words); everything
/// else matches as a case-insensitive substring.
pub fn entity_present(text: &str, value: &str) -> bool {
    if let Some(day) = parse_date(value) {
        if value.len() >= 8 {
            return scan_dates(text).iter().any(|(_, _, d)| *d == day)
                || text.to_ascii_lowercase().contains(&value.to_ascii_lowercase());
        }
    }
    text.to_ascii_lowercase().contains(&value.to_ascii_lowercase())
}

/// All goal entities missing from the text; empty means extraction
/// succeeded.
pub fn missing_entities<'a>(text: &str, goal: &'a GoalMeta) -> Vec<(&'a str, &'a str)> {
    goal.entities()
        .filter(|(_, v)| !entity_present(text, v))
        .collect()
}
