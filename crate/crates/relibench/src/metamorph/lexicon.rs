//! Fixed lexicons backing the rule-based relations: synonym pairs and
//! the distractor sentence bank. Versioned with the crate; changing
//! them changes perturbed texts, so treat edits as format changes.

/// Whole-word (or whole-phrase) synonym substitutions. Keys are
/// matched case-insensitively outside quoted spans; none of them may
/// collide with task goal entities.
pub const SYNONYMS: &[(&str, &str)] = &[
    ("book", "schedule"),
    ("meeting", "session"),
    ("about", "regarding"),
    ("cheapest", "least expensive"),
    ("flight", "plane ticket"),
    ("create", "open"),
    ("ticket", "case"),
    ("close", "resolve"),
    ("order", "purchase"),
    ("units", "pieces"),
    ("unit", "piece"),
    ("shipping", "delivering"),
    ("customer", "client"),
    ("search", "query"),
    ("find", "locate"),
    ("product", "item"),
    ("category", "section"),
    ("instead", "as an alternative"),
    ("taken", "occupied"),
    ("priority", "urgency"),
    ("resolution", "outcome note"),
    ("reason", "justification"),
    ("coupon", "promo code"),
    ("using", "applying"),
    ("knowledge base", "help center"),
    ("escalate", "hand up"),
    ("already", "currently"),
    ("slot", "time slot"),
    ("then", "and then"),
    ("please", "kindly"),
    ("available", "open"),
    ("confirm", "finalize"),
    ("cancel", "call off"),
    ("check", "look at"),
    ("list", "enumerate"),
    ("status", "state"),
    ("return", "send back"),
    ("inventory", "stock"),
    ("price", "fare"),
    ("passenger", "traveler"),
];

/// Irrelevant domain-flavored sentences injected by the distractor
/// relation. None mention task entities.
pub const DISTRACTORS: &[&str] = &[
    "By the way, the office coffee machine was serviced last week.",
    "Unrelatedly, the quarterly newsletter ships next month.",
    "Note that the lobby elevator is under maintenance this week.",
    "Someone mentioned the weather in Lisbon is lovely this time of year.",
    "The IT team migrated the internal wiki over the weekend.",
    "A reminder that visitor badges renew annually.",
    "The cafeteria menu now includes a vegetarian option.",
    "Our branding guidelines were refreshed recently.",
    "The annual team offsite is still being planned.",
    "Please ignore any rumors about the printer outage downstairs.",
];
