//! Millisecond-resolution UTC timestamps.
//!
//! Every timestamp in the system is stored as milliseconds since the Unix
//! epoch and rendered as an RFC 3339 string with exactly three fractional
//! digits and a `Z` suffix, so serialized artifacts are byte-stable.

use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
#[error("invalid RFC 3339 timestamp {input:?}: {source}")]
pub struct TimestampError {
    pub input: String,
    #[source]
    source: chrono::ParseError,
}

/// A UTC instant with millisecond resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn plus_millis(self, delta: i64) -> Self {
        Timestamp(self.0 + delta)
    }

    pub fn parse(s: &str) -> Result<Self, TimestampError> {
        let dt = DateTime::parse_from_rfc3339(s).map_err(|e| TimestampError {
            input: s.to_string(),
            source: e,
        })?;
        Ok(Timestamp(dt.with_timezone(&Utc).timestamp_millis()))
    }

    pub fn to_rfc3339(self) -> String {
        self.as_datetime().to_rfc3339_opts(SecondsFormat::Millis, true)
    }

    /// Calendar day in `YYYY-MM-DD` form, used for usage-cost grouping.
    pub fn day(self) -> String {
        self.as_datetime().format("%Y-%m-%d").to_string()
    }

    fn as_datetime(self) -> DateTime<Utc> {
        DateTime::<Utc>::from_timestamp_millis(self.0).expect("timestamp within chrono range")
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}
