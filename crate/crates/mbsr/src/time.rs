//! ISO-8601 UTC text for [`Timestamp`] and the wall clock.

use chrono::{DateTime, SecondsFormat, Utc};
use mbsr_core::{Clock, Timestamp};

/// `2024-02-05T18:36:19Z`. Out-of-range values fall back to raw seconds.
pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::<Utc>::from_timestamp(t.0, 0) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Secs, true),
        None => t.0.to_string(),
    }
}

/// Accepts RFC 3339 with any offset; sub-second digits are dropped.
pub fn parse_timestamp(text: &str) -> Result<Timestamp, chrono::ParseError> {
    DateTime::parse_from_rfc3339(text.trim()).map(|dt| Timestamp(dt.timestamp()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp(Utc::now().timestamp())
    }
}
