//! Time units and human-readable durations.
//!
//! Timestamps are plain integers in a dataset-native unit (days for
//! rating sites, minutes for vote streams, abstract steps for synthetic
//! logs). A duration such as `"1d"` only has meaning once it is resolved
//! against that unit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer timestamp in the dataset's native unit.
pub type Timestamp = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Second,
    Minute,
    Hour,
    Day,
    /// Dimensionless step; durations must be given as bare integers.
    #[default]
    Step,
}

impl TimeUnit {
    fn seconds(self) -> Option<i64> {
        match self {
            TimeUnit::Second => Some(1),
            TimeUnit::Minute => Some(60),
            TimeUnit::Hour => Some(3_600),
            TimeUnit::Day => Some(86_400),
            TimeUnit::Step => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::Second => "second",
            TimeUnit::Minute => "minute",
            TimeUnit::Hour => "hour",
            TimeUnit::Day => "day",
            TimeUnit::Step => "step",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" | "sec" | "second" | "seconds" => Ok(TimeUnit::Second),
            "m" | "min" | "minute" | "minutes" => Ok(TimeUnit::Minute),
            "h" | "hour" | "hours" => Ok(TimeUnit::Hour),
            "d" | "day" | "days" => Ok(TimeUnit::Day),
            "step" | "steps" | "unit" | "units" => Ok(TimeUnit::Step),
            other => Err(Error::invalid(format!("unknown time unit '{other}'"))),
        }
    }
}

/// A duration as written by a user: a count and an optional unit suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HumanDuration {
    pub amount: i64,
    pub unit: Option<TimeUnit>,
}

impl FromStr for HumanDuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
        let (digits, suffix) = s.split_at(split);
        let amount: i64 = digits
            .parse()
            .map_err(|_| Error::invalid(format!("malformed duration '{s}'")))?;
        let unit = if suffix.is_empty() {
            None
        } else {
            Some(suffix.parse::<TimeUnit>()?)
        };
        Ok(HumanDuration { amount, unit })
    }
}

impl HumanDuration {
    /// Converts into whole native units. Fails when the duration is not an
    /// integer multiple of the native unit or is not positive.
    pub fn resolve(self, native: TimeUnit) -> Result<Timestamp> {
        if self.amount <= 0 {
            return Err(Error::invalid("durations must be positive"));
        }
        let Some(unit) = self.unit else {
            return Ok(self.amount);
        };
        if unit == native {
            return Ok(self.amount);
        }
        let (Some(from), Some(to)) = (unit.seconds(), native.seconds()) else {
            return Err(Error::invalid(format!(
                "cannot convert a duration in {unit}s into {native}s"
            )));
        };
        let total = self.amount * from;
        if total % to != 0 {
            return Err(Error::invalid(format!(
                "{}{} is not a whole number of {native}s",
                self.amount,
                unit.label()
            )));
        }
        Ok(total / to)
    }
}

/// Parses and resolves a duration string in one step.
pub fn parse_duration(s: &str, native: TimeUnit) -> Result<Timestamp> {
    s.parse::<HumanDuration>()?.resolve(native)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_against_native_unit() {
        assert_eq!(parse_duration("1d", TimeUnit::Day).unwrap(), 1);
        assert_eq!(parse_duration("20d", TimeUnit::Day).unwrap(), 20);
        assert_eq!(parse_duration("1h", TimeUnit::Minute).unwrap(), 60);
        assert_eq!(parse_duration("1d", TimeUnit::Minute).unwrap(), 1_440);
        assert_eq!(parse_duration("7", TimeUnit::Step).unwrap(), 7);
    }

    #[test]
    fn rejects_fractional_and_unitless_conversions() {
        assert!(parse_duration("1h", TimeUnit::Day).is_err());
        assert!(parse_duration("1d", TimeUnit::Step).is_err());
        assert!(parse_duration("0d", TimeUnit::Day).is_err());
        assert!(parse_duration("d", TimeUnit::Day).is_err());
        assert!(parse_duration("3w", TimeUnit::Day).is_err());
    }
}
