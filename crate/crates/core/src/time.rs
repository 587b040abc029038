//! UTC timestamps at second resolution and their ISO-8601 text form.

use chrono::{DateTime, SecondsFormat, SubsecRound, TimeZone, Utc};

pub type Timestamp = DateTime<Utc>;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format(ts: &Timestamp) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses any RFC 3339 timestamp, normalizes it to UTC and drops sub-second
/// precision.
pub fn parse(s: &str) -> Option<Timestamp> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
}

/// Current wall-clock time, truncated to the second.
pub fn now() -> Timestamp {
    Utc::now().trunc_subsecs(0)
}

pub fn from_unix(secs: i64) -> Timestamp {
    Utc.timestamp_opt(secs, 0).single().expect("timestamp in range")
}

/// Seconds since midnight UTC, in `0..86_400`.
pub fn time_of_day(ts: &Timestamp) -> i64 {
    ts.timestamp().rem_euclid(SECONDS_PER_DAY)
}

/// Serde adapter that writes timestamps in the canonical second-resolution form.
pub mod serde_secs {
    use super::Timestamp;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).ok_or_else(|| D::Error::custom(format!("invalid timestamp {raw:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_round_trip() {
        let t = parse("2024-06-01T13:05:00Z").unwrap();
        assert_eq!(format(&t), "2024-06-01T13:05:00Z");
        assert_eq!(time_of_day(&t), 13 * 3600 + 300);
    }

    #[test]
    fn offsets_normalize_to_utc() {
        let t = parse("2024-06-01T15:05:00.750+02:00").unwrap();
        assert_eq!(format(&t), "2024-06-01T13:05:00Z");
    }

    #[test]
    fn time_of_day_before_epoch() {
        assert_eq!(time_of_day(&from_unix(-1)), SECONDS_PER_DAY - 1);
    }
}
