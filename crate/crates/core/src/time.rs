//! UTC timestamps with second precision, written as RFC 3339 (`...Z`).

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimestampError {
    #[error("invalid RFC 3339 timestamp `{0}`")]
    Invalid(String),
    #[error("timestamp `{0}` has sub-second precision")]
    SubSecond(String),
    #[error("timestamp out of range")]
    OutOfRange,
}

impl Timestamp {
    pub fn from_unix(seconds: i64) -> Result<Self, TimestampError> {
        Utc.timestamp_opt(seconds, 0)
            .single()
            .map(Timestamp)
            .ok_or(TimestampError::OutOfRange)
    }

    pub fn unix(self) -> i64 {
        self.0.timestamp()
    }

    pub fn plus_seconds(self, seconds: i64) -> Self {
        Timestamp::from_unix(self.unix() + seconds).expect("timestamp arithmetic in range")
    }

    pub fn minus_days(self, days: i64) -> Self {
        self.plus_seconds(-days * 86_400)
    }
}

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed =
            DateTime::parse_from_rfc3339(s).map_err(|_| TimestampError::Invalid(s.to_owned()))?;
        if parsed.timestamp_subsec_nanos() != 0 {
            return Err(TimestampError::SubSecond(s.to_owned()));
        }
        Ok(Timestamp(parsed.with_timezone(&Utc)))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
