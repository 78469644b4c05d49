//! Calendar bucketing of measurement dates.
//!
//! Keys: `YYYY-MM-DD` (daily), `YYYY-Www` (ISO 8601 week), `YYYY-MM`
//! (monthly), `YYYY-Qn` (quarterly, Q1 = Jan-Mar), `YYYY` (yearly).

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Daily,
    Weekly,
    Monthly,
    Quarterly,
    Yearly,
}

impl Granularity {
    pub const ALL: [Granularity; 5] = [
        Granularity::Daily,
        Granularity::Weekly,
        Granularity::Monthly,
        Granularity::Quarterly,
        Granularity::Yearly,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Granularity::Daily => "daily",
            Granularity::Weekly => "weekly",
            Granularity::Monthly => "monthly",
            Granularity::Quarterly => "quarterly",
            Granularity::Yearly => "yearly",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.keyword() == word)
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed period key {0:?}")]
pub struct PeriodParseError(pub String);

/// A calendar bucket. Internally the first day of the bucket plus its
/// granularity; the textual key is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodKey {
    granularity: Granularity,
    start: NaiveDate,
}

impl PeriodKey {
    /// The bucket of `granularity` containing `date`.
    pub fn containing(date: NaiveDate, granularity: Granularity) -> Self {
        let start = match granularity {
            Granularity::Daily => date,
            Granularity::Weekly => {
                let week = date.iso_week();
                NaiveDate::from_isoywd_opt(week.year(), week.week(), Weekday::Mon)
                    .expect("ISO week of a valid date exists")
            }
            Granularity::Monthly => date.with_day(1).expect("day 1 exists"),
            Granularity::Quarterly => {
                let month = (date.month0() / 3) * 3 + 1;
                NaiveDate::from_ymd_opt(date.year(), month, 1).expect("quarter start exists")
            }
            Granularity::Yearly => {
                NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("January 1st exists")
            }
        };
        Self { granularity, start }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// First day after the bucket.
    pub fn end_exclusive(&self) -> NaiveDate {
        self.next().start
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        Self::containing(date, self.granularity) == *self
    }

    pub fn next(&self) -> Self {
        let start = match self.granularity {
            Granularity::Daily => self.start + Duration::days(1),
            Granularity::Weekly => self.start + Duration::days(7),
            Granularity::Monthly => add_months(self.start, 1),
            Granularity::Quarterly => add_months(self.start, 3),
            Granularity::Yearly => add_months(self.start, 12),
        };
        Self {
            granularity: self.granularity,
            start,
        }
    }

    /// Buckets of a finer granularity that make up this one, e.g. the three
    /// months of a quarter. Weeks straddling the boundary are included.
    pub fn subdivide(&self, finer: Granularity) -> Vec<PeriodKey> {
        let mut out = Vec::new();
        let end = self.end_exclusive();
        let mut key = PeriodKey::containing(self.start, finer);
        while key.start < end {
            out.push(key);
            key = key.next();
        }
        out
    }

    /// Inclusive range of keys from `self` to `last` (same granularity).
    pub fn range_to(&self, last: &PeriodKey) -> Vec<PeriodKey> {
        let mut out = Vec::new();
        if self.granularity != last.granularity {
            return out;
        }
        let mut key = *self;
        while key <= *last {
            out.push(key);
            key = key.next();
        }
        out
    }
}

fn add_months(date: NaiveDate, months: u32) -> NaiveDate {
    date.checked_add_months(chrono::Months::new(months))
        .expect("date within chrono range")
}

impl fmt::Display for PeriodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.start;
        match self.granularity {
            Granularity::Daily => write!(f, "{:04}-{:02}-{:02}", d.year(), d.month(), d.day()),
            Granularity::Weekly => {
                let week = d.iso_week();
                write!(f, "{:04}-W{:02}", week.year(), week.week())
            }
            Granularity::Monthly => write!(f, "{:04}-{:02}", d.year(), d.month()),
            Granularity::Quarterly => write!(f, "{:04}-Q{}", d.year(), d.month0() / 3 + 1),
            Granularity::Yearly => write!(f, "{:04}", d.year()),
        }
    }
}

impl FromStr for PeriodKey {
    type Err = PeriodParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || PeriodParseError(text.to_string());
        let number = |s: &str, width: usize| -> Result<u32, PeriodParseError> {
            if s.len() == width && s.bytes().all(|b| b.is_ascii_digit()) {
                s.parse().map_err(|_| err())
            } else {
                Err(err())
            }
        };
        let parts: Vec<&str> = text.split('-').collect();
        let year = number(parts[0], 4)? as i32;
        let (granularity, start) = match parts.as_slice() {
            [_] => (Granularity::Yearly, NaiveDate::from_ymd_opt(year, 1, 1)),
            [_, q] if q.starts_with('Q') => {
                let quarter = number(&q[1..], 1)?;
                if !(1..=4).contains(&quarter) {
                    return Err(err());
                }
                (
                    Granularity::Quarterly,
                    NaiveDate::from_ymd_opt(year, (quarter - 1) * 3 + 1, 1),
                )
            }
            [_, w] if w.starts_with('W') => {
                let week = number(&w[1..], 2)?;
                (
                    Granularity::Weekly,
                    NaiveDate::from_isoywd_opt(year, week, Weekday::Mon),
                )
            }
            [_, m] => (
                Granularity::Monthly,
                NaiveDate::from_ymd_opt(year, number(m, 2)?, 1),
            ),
            [_, m, d] => (
                Granularity::Daily,
                NaiveDate::from_ymd_opt(year, number(m, 2)?, number(d, 2)?),
            ),
            _ => return Err(err()),
        };
        let start = start.ok_or_else(err)?;
        Ok(Self { granularity, start })
    }
}

impl Serialize for PeriodKey {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PeriodKey {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a strict ISO 8601 calendar date (`YYYY-MM-DD`).
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let bytes = text.as_bytes();
    if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn keys_for_a_september_date() {
        let d = date(2014, 9, 17);
        let key = |g| PeriodKey::containing(d, g).to_string();
        assert_eq!(key(Granularity::Daily), "2014-09-17");
        assert_eq!(key(Granularity::Weekly), "2014-W38");
        assert_eq!(key(Granularity::Monthly), "2014-09");
        assert_eq!(key(Granularity::Quarterly), "2014-Q3");
        assert_eq!(key(Granularity::Yearly), "2014");
    }

    #[test]
    fn iso_week_crosses_year() {
        // 2014-12-29 is a Monday in ISO week 2015-W01.
        let key = PeriodKey::containing(date(2014, 12, 29), Granularity::Weekly);
        assert_eq!(key.to_string(), "2015-W01");
        assert_eq!("2015-W01".parse::<PeriodKey>().unwrap(), key);
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in ["", "14", "2014-13", "2014-Q5", "2014-Q0", "2014-W54", "2014-9", "2014-02-30", "x"] {
            assert!(bad.parse::<PeriodKey>().is_err(), "{bad}");
        }
    }

    #[test]
    fn quarter_subdivides_into_months() {
        let q: PeriodKey = "2014-Q3".parse().unwrap();
        let months: Vec<String> = q
            .subdivide(Granularity::Monthly)
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(months, ["2014-07", "2014-08", "2014-09"]);
    }

    #[test]
    fn range_is_inclusive() {
        let from: PeriodKey = "2014-Q1".parse().unwrap();
        let to: PeriodKey = "2014-Q3".parse().unwrap();
        let keys: Vec<String> = from.range_to(&to).iter().map(ToString::to_string).collect();
        assert_eq!(keys, ["2014-Q1", "2014-Q2", "2014-Q3"]);
        let month: PeriodKey = "2014-09".parse().unwrap();
        assert!(from.range_to(&month).is_empty());
    }

    #[test]
    fn strict_dates() {
        assert_eq!(parse_date("2014-09-01"), Some(date(2014, 9, 1)));
        assert_eq!(parse_date("2014-9-1"), None);
        assert_eq!(parse_date("2014-02-29"), None);
    }

    proptest! {
        #[test]
        fn every_date_has_one_consistent_key_per_granularity(days in 0i64..200_000) {
            let d = date(1900, 1, 1) + Duration::days(days);
            let month = PeriodKey::containing(d, Granularity::Monthly);
            let quarter = PeriodKey::containing(d, Granularity::Quarterly);
            let year = PeriodKey::containing(d, Granularity::Yearly);
            for g in Granularity::ALL {
                let key = PeriodKey::containing(d, g);
                prop_assert!(key.contains(d));
                prop_assert!(key.start() <= d && d < key.end_exclusive());
                let reparsed: PeriodKey = key.to_string().parse().unwrap();
                prop_assert_eq!(reparsed, key);
            }
            prop_assert!(quarter.contains(month.start()));
            prop_assert!(year.contains(quarter.start()));
            prop_assert!(quarter.subdivide(Granularity::Monthly).contains(&month));
        }
    }
}
