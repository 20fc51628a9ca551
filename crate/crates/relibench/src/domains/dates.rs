//! Date and time parsing shared by tools, task generation, and the
//! temporal perturbations.
//!
//! Canonical form is ISO (YYYY-MM-DD). Tools additionally accept the
//! alternate surface forms the perturbations emit, and relative words
//! grounded against a fixed simulation "today" of 2025-12-31.

use chrono::{Duration, NaiveDate};

/// Fixed simulation clock; relative dates resolve against this.
pub fn simulation_today() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 12, 31).unwrap()
}

const FORMATS: [&str; 4] = ["%Y-%m-%d", "%b %d, %Y", "%B %d, %Y", "%m/%d/%Y"];

/// Parses any accepted date surface form to a calendar day.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "today" => return Some(simulation_today()),
        "tomorrow" => return Some(simulation_today() + Duration::days(1)),
        "the day after tomorrow" | "day after tomorrow" => {
            return Some(simulation_today() + Duration::days(2))
        }
        _ => {}
    }
    FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(t, f).ok())
}

/// Canonical ISO rendering.
pub fn to_iso(date: NaiveDate) -> String {
    date.format("%Y-%m-%d").to_string()
}

/// Alternate surface forms of a date, used by the date-format
/// perturbation. All parse back to the same day via [`parse_date`].
pub fn alternate_formats(date: NaiveDate) -> Vec<String> {
    let mut out = vec![
        date.format("%b %-d, %Y").to_string(),
        date.format("%m/%d/%Y").to_string(),
        date.format("%B %-d, %Y").to_string(),
    ];
    let delta = (date - simulation_today()).num_days();
    match delta {
        1 => out.push("tomorrow".to_string()),
        2 => out.push("the day after tomorrow".to_string()),
        _ => {}
    }
    out
}

/// Whether a date can be written as a relative word under the fixed
/// simulation clock.
pub fn relative_word(date: NaiveDate) -> Option<&'static str> {
    match (date - simulation_today()).num_days() {
        0 => Some("today"),
        1 => Some("tomorrow"),
        2 => Some("the day after tomorrow"),
        _ => None,
    }
}

/// Normalizes a time to zero-padded HH:MM, 24-hour. Accepts "9:00".
pub fn parse_time(text: &str) -> Option<String> {
    let t = text.trim();
    let (h, m) = t.split_once(':')?;
    let h: u32 = h.trim().parse().ok()?;
    let m: u32 = m.trim().parse().ok()?;
    if h > 23 || m > 59 {
        return None;
    }
    Some(format!("{h:02}:{m:02}"))
}

/// All date tokens in a text, in any accepted surface form.
pub fn scan_dates(text: &str) -> Vec<(usize, usize, NaiveDate)> {
    let mut found = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if !text.is_char_boundary(i) {
            i += 1;
            continue;
        }
        // Longest candidate first: month-name forms can contain spaces.
        let mut matched = None;
        for len in (4..=20).rev() {
            if i + len > text.len() || !text.is_char_boundary(i + len) {
                continue;
            }
            let slice = &text[i..i + len];
            if slice != slice.trim() {
                continue; // spans must be exact, not whitespace-padded
            }
            if let Some(d) = parse_date(slice) {
                matched = Some((len, d));
                break;
            }
        }
        if let Some((len, d)) = matched {
            found.push((i, i + len, d));
            i += len;
        } else {
            i += 1;
        }
    }
    found
}
