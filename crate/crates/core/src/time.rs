//! Timestamp parsing and calendar bucketing shared by the analyses.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, NaiveTime, SubsecRound, Timelike, Utc};
use serde::{Deserialize, Serialize};

/// Parses an ISO-8601 timestamp into UTC at second resolution.
///
/// Accepts RFC 3339 (any offset), naive `YYYY-MM-DDTHH:MM:SS[.fff]` or
/// `YYYY-MM-DD HH:MM:SS` (read as UTC) and bare dates (UTC midnight).
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Some(ts.with_timezone(&Utc).trunc_subsecs(0));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc().trunc_subsecs(0));
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok().map(|d| d.and_time(NaiveTime::MIN).and_utc())
}

/// Canonical wire form for timestamps: `2023-11-01T08:30:00Z`.
pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Parses a duration such as `7d`, `36h`, `90m`, `45s` or a bare number of
/// seconds.
pub fn parse_duration(raw: &str) -> Option<Duration> {
    let raw = raw.trim();
    let (digits, unit) = match raw.char_indices().find(|(_, c)| !c.is_ascii_digit()) {
        Some((i, _)) => raw.split_at(i),
        None => (raw, "s"),
    };
    let n: i64 = digits.parse().ok()?;
    match unit {
        "s" => Some(Duration::seconds(n)),
        "m" => Some(Duration::minutes(n)),
        "h" => Some(Duration::hours(n)),
        "d" => Some(Duration::days(n)),
        "w" => Some(Duration::weeks(n)),
        _ => None,
    }
}

pub fn format_duration(d: Duration) -> String {
    let secs = d.num_seconds();
    if secs % 86_400 == 0 {
        format!("{}d", secs / 86_400)
    } else if secs % 3_600 == 0 {
        format!("{}h", secs / 3_600)
    } else if secs % 60 == 0 {
        format!("{}m", secs / 60)
    } else {
        format!("{secs}s")
    }
}

/// Width of a time bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinSize {
    Hour,
    #[default]
    Day,
    Week,
}

impl BinSize {
    pub fn duration(self) -> Duration {
        match self {
            BinSize::Hour => Duration::hours(1),
            BinSize::Day => Duration::days(1),
            BinSize::Week => Duration::weeks(1),
        }
    }

    /// Start of the bucket containing `ts`. Weeks are 7-day blocks anchored
    /// at the UTC day of `origin`.
    fn floor(self, ts: DateTime<Utc>) -> DateTime<Utc> {
        match self {
            BinSize::Hour => ts.date_naive().and_hms_opt(ts.hour(), 0, 0).unwrap().and_utc(),
            BinSize::Day | BinSize::Week => ts.date_naive().and_time(NaiveTime::MIN).and_utc(),
        }
    }

    /// Bucket label: ISO date for day/week buckets, full timestamp for hours.
    pub fn label(self, start: DateTime<Utc>) -> String {
        match self {
            BinSize::Hour => format_timestamp(&start),
            BinSize::Day | BinSize::Week => start.format("%Y-%m-%d").to_string(),
        }
    }
}

impl fmt::Display for BinSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinSize::Hour => "hour",
            BinSize::Day => "day",
            BinSize::Week => "week",
        })
    }
}

impl FromStr for BinSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hour" | "h" => Ok(BinSize::Hour),
            "day" | "d" => Ok(BinSize::Day),
            "week" | "w" => Ok(BinSize::Week),
            other => Err(format!("unknown bin size `{other}` (expected hour, day or week)")),
        }
    }
}

/// A contiguous run of equal-width buckets covering `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketAxis {
    pub bin: BinSize,
    pub origin: DateTime<Utc>,
    pub len: usize,
}

impl BucketAxis {
    /// Buckets from the floor of `start` until the bucket containing the
    /// last instant before `end`.
    pub fn covering(start: DateTime<Utc>, end: DateTime<Utc>, bin: BinSize) -> Self {
        let origin = bin.floor(start);
        let width = bin.duration().num_seconds();
        let span = (end - origin).num_seconds().max(0);
        let len = ((span + width - 1) / width) as usize;
        BucketAxis { bin, origin, len }
    }

    pub fn index_of(&self, ts: DateTime<Utc>) -> Option<usize> {
        if ts < self.origin {
            return None;
        }
        let idx = ((ts - self.origin).num_seconds() / self.bin.duration().num_seconds()) as usize;
        (idx < self.len).then_some(idx)
    }

    pub fn start_of(&self, idx: usize) -> DateTime<Utc> {
        self.origin + self.bin.duration() * idx as i32
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len).map(|i| self.bin.label(self.start_of(i))).collect()
    }
}
