//! The nine action metamorphic relations. Each transforms a task
//! description while keeping every goal entity recoverable, so the
//! expected end-state relation stays the identity.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::types::GoalMeta;
use crate::domains::dates::{parse_date, relative_word, scan_dates, to_iso};
use crate::metamorph::lexicon::{DISTRACTORS, SYNONYMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MrId {
    Synonym,
    Paraphrase,
    Voice,
    Reordering,
    SplitMerge,
    Distractor,
    Correction,
    DateFormat,
    RelativeTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MrCategory {
    Linguistic,
    Structural,
    Contextual,
    Temporal,
}

impl MrId {
    pub const ALL: [MrId; 9] = [
        MrId::Synonym,
        MrId::Paraphrase,
        MrId::Voice,
        MrId::Reordering,
        MrId::SplitMerge,
        MrId::Distractor,
        MrId::Correction,
        MrId::DateFormat,
        MrId::RelativeTime,
    ];

    pub fn category(self) -> MrCategory {
        match self {
            MrId::Synonym | MrId::Paraphrase | MrId::Voice => MrCategory::Linguistic,
            MrId::Reordering | MrId::SplitMerge => MrCategory::Structural,
            MrId::Distractor | MrId::Correction => MrCategory::Contextual,
            MrId::DateFormat | MrId::RelativeTime => MrCategory::Temporal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MrId::Synonym => "Synonym",
            MrId::Paraphrase => "Paraphrase",
            MrId::Voice => "Voice",
            MrId::Reordering => "Reordering",
            MrId::SplitMerge => "SplitMerge",
            MrId::Distractor => "Distractor",
            MrId::Correction => "Correction",
            MrId::DateFormat => "DateFormat",
            MrId::RelativeTime => "RelativeTime",
        }
    }

    /// Fixed application order, so composed plans are deterministic
    /// regardless of draw order. Whole-text rewrites go first, the
    /// append-only distractor last.
    pub fn apply_rank(self) -> u8 {
        match self {
            MrId::Paraphrase => 0,
            MrId::Voice => 1,
            MrId::SplitMerge => 2,
            MrId::Reordering => 3,
            MrId::Synonym => 4,
            MrId::Correction => 5,
            MrId::DateFormat => 6,
            MrId::RelativeTime => 7,
            MrId::Distractor => 8,
        }
    }
}

impl std::fmt::Display for MrId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pluggable rewriting backend for the paraphrase relation. The
/// default is the deterministic template bank; an LLM-backed hook can
/// replace it, but is disabled by default.
pub trait ParaphraseBackend: Send + Sync {
    fn paraphrase(&self, description: &str, goal: &GoalMeta, rng: &mut ChaCha8Rng)
        -> Option<String>;
}

/// Deterministic per-goal-shape templates.
pub struct TemplateParaphrase;

impl ParaphraseBackend for TemplateParaphrase {
    fn paraphrase(
        &self,
        _description: &str,
        goal: &GoalMeta,
        _rng: &mut ChaCha8Rng,
    ) -> Option<String> {
        let g = |k: &str| goal.get(k).map(str::to_string);
        // The goal shape identifies the task family.
        if let (Some(topic), Some(date), Some(time)) = (g("topic"), g("date"), g("time")) {
            return Some(match g("fallback_time") {
                Some(fb) => format!(
                    "Please get a meeting about '{topic}' onto the calendar for {date} at {time}; if that time is unavailable, use {fb} instead."
                ),
                None => format!(
                    "Please get a meeting about '{topic}' onto the calendar for {date}, starting at {time}."
                ),
            });
        }
        if let (Some(passenger), Some(origin), Some(dest), Some(date)) =
            (g("passenger"), g("origin"), g("dest"), g("date"))
        {
            return Some(match g("flight_id") {
                Some(fid) => format!(
                    "I'd like flight {fid} going {origin} to {dest} on {date} booked for {passenger}."
                ),
                None => format!(
                    "I need the lowest-priced flight between {origin} and {dest} on {date} booked for {passenger}."
                ),
            });
        }
        if let (Some(customer), Some(subject), Some(priority), Some(resolution)) =
            (g("customer_id"), g("subject"), g("priority"), g("resolution"))
        {
            return Some(format!(
                "Open a {priority}-priority ticket for customer {customer} regarding '{subject}', and once that is done, close it noting '{resolution}'."
            ));
        }
        if let (Some(ticket), Some(to), Some(query), Some(reason)) =
            (g("ticket_id"), g("escalate_to"), g("query"), g("reason"))
        {
            return Some(format!(
                "After checking the knowledge base for '{query}', escalate ticket {ticket} up to {to}, citing '{reason}'."
            ));
        }
        if let (Some(customer), Some(qty), Some(address)) = (g("customer_id"), g("qty"), g("address"))
        {
            if let Some(sku) = g("sku") {
                return Some(format!(
                    "Place an order of {qty} x {sku} for customer {customer}; deliver it to '{address}'."
                ));
            }
            if let (Some(category), Some(coupon)) = (g("category"), g("coupon")) {
                return Some(format!(
                    "For customer {customer}, order {qty} of the lowest-priced item in the {category} category with coupon {coupon} applied; deliver to '{address}'."
                ));
            }
        }
        None
    }
}

/// Spans inside single quotes; synonym substitution never touches
/// these (they hold verbatim goal entities).
fn quoted_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c == '\'' {
            match open.take() {
                Some(start) => spans.push((start, i + 1)),
                None => open = Some(i),
            }
        }
    }
    spans
}

fn in_quotes(spans: &[(usize, usize)], pos: usize) -> bool {
    spans.iter().any(|&(a, b)| pos >= a && pos < b)
}

fn is_word_boundary(bytes: &[u8], idx: usize) -> bool {
    idx == 0 || idx >= bytes.len() || !bytes[idx].is_ascii_alphanumeric()
}

/// Case-insensitive whole-word find outside quoted spans.
fn find_word(text: &str, word: &str, from: usize) -> Option<usize> {
    let lower = text.to_ascii_lowercase();
    let needle = word.to_ascii_lowercase();
    let spans = quoted_spans(text);
    let mut start = from;
    while let Some(rel) = lower[start..].find(&needle) {
        let pos = start + rel;
        let end = pos + needle.len();
        let bytes = lower.as_bytes();
        if is_word_boundary(bytes, pos.wrapping_sub(1).min(pos.saturating_sub(1)))
            && (pos == 0 || !bytes[pos - 1].is_ascii_alphanumeric())
            && is_word_boundary(bytes, end)
            && !in_quotes(&spans, pos)
        {
            return Some(pos);
        }
        start = pos + 1;
    }
    None
}

fn match_case(replacement: &str, original: &str) -> String {
    if original.chars().next().is_some_and(|c| c.is_uppercase()) {
        let mut cs = replacement.chars();
        match cs.next() {
            Some(first) => first.to_uppercase().collect::<String>() + cs.as_str(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    }
}

fn apply_synonym(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let applicable: Vec<_> = SYNONYMS
        .iter()
        .filter(|(k, _)| find_word(text, k, 0).is_some())
        .collect();
    if applicable.is_empty() {
        return None;
    }
    let mut picks = applicable.clone();
    picks.shuffle(rng);
    let take = picks.len().min(3.max(1));
    let mut out = text.to_string();
    for (key, replacement) in picks.into_iter().take(take) {
        // Scan forward past each replacement: some replacements
        // contain their key ("slot" -> "time slot").
        let mut from = 0;
        while let Some(pos) = find_word(&out, key, from) {
            let original = &out[pos..pos + key.len()];
            let rep = match_case(replacement, original);
            out.replace_range(pos..pos + key.len(), &rep);
            from = pos + rep.len();
        }
    }
    (out != text).then_some(out)
}

fn apply_voice(text: &str) -> Option<String> {
    const PARTICIPLES: [(&str, &str); 6] = [
        ("Book ", "booked"),
        ("Create ", "created"),
        ("Order ", "ordered"),
        ("Find ", "found"),
        ("Search ", "searched"),
        ("Schedule ", "scheduled"),
    ];
    for (verb, participle) in PARTICIPLES {
        if let Some(rest) = text.strip_prefix(verb) {
            let mut rest = rest.to_string();
            if let Some(first) = rest.get(0..1) {
                let lower = first.to_ascii_lowercase();
                rest.replace_range(0..1, &lower);
            }
            return Some(format!(
                "It is requested that the following be {participle}: {rest}"
            ));
        }
    }
    // Generic passive wrapper when no leading verb matches.
    Some(format!(
        "The following request should be carried out: {text}"
    ))
}

fn first_sentence_end(text: &str) -> usize {
    text.find(". ").map(|i| i + 1).unwrap_or(text.len())
}

fn apply_reordering(text: &str) -> Option<String> {
    let cut = first_sentence_end(text);
    let (first, rest) = text.split_at(cut);
    let first = first.trim_end();

    let lowercase_first = |s: &str| {
        let mut out = s.to_string();
        if let Some(c) = out.get(0..1) {
            let lower = c.to_ascii_lowercase();
            out.replace_range(0..1, &lower);
        }
        out
    };
    let glue = |moved: String, remainder: &str| {
        let remainder = remainder.trim_end_matches('.');
        let mut out = format!("{moved}, {}.", lowercase_first(remainder));
        if !rest.trim().is_empty() {
            out.push(' ');
            out.push_str(rest.trim_start());
        }
        Some(out)
    };

    // Move a trailing or embedded constraint phrase to the front.
    // Patterns tried in a fixed order; the first match wins.
    if let Some(pos) = first.find(" with priority ") {
        let phrase_end = first[pos + 1..]
            .find(',')
            .map(|i| pos + 1 + i)
            .unwrap_or(first.len().saturating_sub(1));
        let phrase = &first[pos + 1..phrase_end];
        let mut remainder = String::new();
        remainder.push_str(&first[..pos]);
        remainder.push_str(&first[phrase_end..]);
        return glue(match_case(phrase, "With"), &remainder);
    }
    if let Some(pos) = first.find(" with reason '") {
        if let Some(close) = first[pos + 14..].find('\'') {
            let phrase_end = pos + 14 + close + 1;
            let phrase = &first[pos + 1..phrase_end];
            let mut remainder = String::new();
            remainder.push_str(&first[..pos]);
            remainder.push_str(&first[phrase_end..]);
            return glue(match_case(phrase, "With"), &remainder);
        }
    }
    if let Some(pos) = first.rfind(", shipping to '") {
        let phrase = first[pos + 2..].trim_end_matches('.');
        let remainder = &first[..pos];
        return glue(match_case(phrase, "Shipping"), remainder);
    }
    if let Some(pos) = first.rfind(" for ") {
        let tail = first[pos + 5..].trim_end_matches('.');
        if !tail.is_empty() && !tail.contains(' ') && first.ends_with('.') {
            let remainder = &first[..pos];
            return glue(format!("For {tail}"), remainder);
        }
    }
    if let Some(pos) = first.find(" on ") {
        let after = &first[pos + 4..];
        if let Some((start, end, date)) = scan_dates(after).into_iter().next() {
            if start == 0 {
                if let Some(at_rest) = after[end..].strip_prefix(" at ") {
                    let time_end = at_rest
                        .find(|c: char| !(c.is_ascii_digit() || c == ':'))
                        .unwrap_or(at_rest.len());
                    let time = &at_rest[..time_end];
                    if !time.is_empty() {
                        let phrase_end = pos + 4 + end + 4 + time_end;
                        let mut remainder = String::new();
                        remainder.push_str(&first[..pos]);
                        remainder.push_str(&first[phrase_end..]);
                        return glue(format!("At {time} on {}", to_iso(date)), &remainder);
                    }
                }
            }
        }
    }
    None
}

fn apply_split_merge(text: &str) -> Option<String> {
    // Merge two sentences, or split a ", then " compound.
    let cut = first_sentence_end(text);
    if cut < text.len() {
        let first = text[..cut].trim_end().trim_end_matches('.');
        let mut second = text[cut..].trim_start().to_string();
        if let Some(c) = second.get(0..1) {
            let lower = c.to_ascii_lowercase();
            second.replace_range(0..1, &lower);
        }
        return Some(format!("{first}, and {second}"));
    }
    if let Some(pos) = text.find(", then ") {
        let (a, b) = text.split_at(pos);
        let b = &b[", then ".len()..];
        let mut b = b.to_string();
        if let Some(c) = b.get(0..1) {
            let upper = c.to_ascii_uppercase();
            b.replace_range(0..1, &upper);
        }
        return Some(format!("{a}. Then {b}"));
    }
    None
}

fn apply_distractor(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let sentence = DISTRACTORS[rng.gen_range(0..DISTRACTORS.len())];
    if rng.gen_bool(0.5) {
        Some(format!("{sentence} {text}"))
    } else {
        Some(format!("{text} {sentence}"))
    }
}

fn wrong_value(key: &str, value: &str) -> Option<String> {
    match key {
        "time" | "fallback_time" => {
            let (h, m) = value.split_once(':')?;
            let h: u32 = h.parse().ok()?;
            Some(format!("{:02}:{m}", (h + 1) % 24))
        }
        "date" => {
            let d = parse_date(value)?;
            Some(to_iso(d + chrono::Duration::days(1)))
        }
        "qty" => {
            let q: u32 = value.parse().ok()?;
            Some((q + 1).to_string())
        }
        "priority" => Some(
            match value {
                "high" => "low",
                "low" => "medium",
                _ => "high",
            }
            .to_string(),
        ),
        "escalate_to" => Some(if value == "tier2" { "tier3" } else { "tier2" }.to_string()),
        _ => None,
    }
}

fn apply_correction(text: &str, goal: &GoalMeta, rng: &mut ChaCha8Rng) -> Option<String> {
    let mut candidates: Vec<(String, String, String)> = Vec::new();
    for (key, value) in goal.entities() {
        if let Some(wrong) = wrong_value(key, value) {
            if find_word(text, value, 0).is_some() && find_word(text, &wrong, 0).is_none() {
                candidates.push((key.to_string(), value.to_string(), wrong));
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }
    let (_, correct, wrong) = candidates[rng.gen_range(0..candidates.len())].clone();
    let pos = find_word(text, &correct, 0)?;
    let mut out = text.to_string();
    out.replace_range(pos..pos + correct.len(), &wrong);
    out.push_str(&format!(
        " Wait, I said {wrong} earlier — actually, make that {correct}."
    ));
    Some(out)
}

fn apply_date_format(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    // Reformat ISO-form dates only; other surface forms are left as-is.
    let iso_spans: Vec<_> = scan_dates(text)
        .into_iter()
        .filter(|(a, b, d)| text[*a..*b] == to_iso(*d))
        .collect();
    if iso_spans.is_empty() {
        return None;
    }
    let style = rng.gen_range(0..3);
    let render = |d: chrono::NaiveDate| match style {
        0 => d.format("%b %-d, %Y").to_string(),
        1 => d.format("%m/%d/%Y").to_string(),
        _ => d.format("%B %-d, %Y").to_string(),
    };
    let mut out = String::new();
    let mut last = 0;
    for (a, b, d) in iso_spans {
        out.push_str(&text[last..a]);
        out.push_str(&render(d));
        last = b;
    }
    out.push_str(&text[last..]);
    Some(out)
}

fn apply_relative_time(text: &str) -> Option<String> {
    for (a, b, d) in scan_dates(text) {
        if let Some(word) = relative_word(d) {
            if &text[a..b] != word {
                let mut out = text.to_string();
                out.replace_range(a..b, word);
                return Some(out);
            }
        }
    }
    None
}

/// Applies one relation. Returns `None` when the relation has no
/// applicable site (identity; recorded as not applied by the planner).
pub fn apply_mr(
    mr: MrId,
    description: &str,
    goal: &GoalMeta,
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    apply_mr_with(mr, description, goal, rng, &TemplateParaphrase)
}

/// As [`apply_mr`] with an explicit paraphrase backend.
pub fn apply_mr_with(
    mr: MrId,
    description: &str,
    goal: &GoalMeta,
    rng: &mut ChaCha8Rng,
    paraphrase: &dyn ParaphraseBackend,
) -> Option<String> {
    let out = match mr {
        MrId::Synonym => apply_synonym(description, rng),
        MrId::Paraphrase => paraphrase.paraphrase(description, goal, rng),
        MrId::Voice => apply_voice(description),
        MrId::Reordering => apply_reordering(description),
        MrId::SplitMerge => apply_split_merge(description),
        MrId::Distractor => apply_distractor(description, rng),
        MrId::Correction => apply_correction(description, goal, rng),
        MrId::DateFormat => apply_date_format(description, rng),
        MrId::RelativeTime => apply_relative_time(description),
    };
    out.filter(|o| o != description)
}
