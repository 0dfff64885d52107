//! Biography and place records produced by the dump ingest.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::ParseValueError;
use crate::gender::GenderClass;
use crate::ids::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatePrecision {
    Year,
    Decade,
    Century,
    Millennium,
    Coarser,
}

impl DatePrecision {
    /// Map the numeric precision of a Wikibase time value.
    /// Anything at year resolution or finer (9..=14) counts as `Year`.
    pub fn from_wikibase(precision: i64) -> Self {
        match precision {
            p if p >= 9 => DatePrecision::Year,
            8 => DatePrecision::Decade,
            7 => DatePrecision::Century,
            6 => DatePrecision::Millennium,
            _ => DatePrecision::Coarser,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DatePrecision::Year => "year",
            DatePrecision::Decade => "decade",
            DatePrecision::Century => "century",
            DatePrecision::Millennium => "millennium",
            DatePrecision::Coarser => "coarser",
        }
    }
}

impl FromStr for DatePrecision {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "year" => DatePrecision::Year,
            "decade" => DatePrecision::Decade,
            "century" => DatePrecision::Century,
            "millennium" => DatePrecision::Millennium,
            "coarser" => DatePrecision::Coarser,
            _ => return Err(ParseValueError::new("date precision", s)),
        })
    }
}

impl fmt::Display for DatePrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A year in astronomical numbering (1 BCE is year 0, 2 BCE is −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearValue {
    pub year: i64,
    pub precision: DatePrecision,
}

impl YearValue {
    pub fn new(year: i64, precision: DatePrecision) -> Self {
        Self { year, precision }
    }

    /// The year, if it is precise enough for time bucketing.
    pub fn bucketable(&self) -> Option<i64> {
        (self.precision == DatePrecision::Year).then_some(self.year)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanRecord {
    pub id: EntityId,
    pub gender: GenderClass,
    pub birth: Option<YearValue>,
    pub death: Option<YearValue>,
    pub place_of_birth: Option<EntityId>,
    pub citizenships: BTreeSet<EntityId>,
    pub ethnic_groups: BTreeSet<EntityId>,
    /// Derived from the birthplace; only set by [`crate::places::resolve_country`].
    pub country: Option<EntityId>,
    /// Wikipedia site codes such as `enwiki`.
    pub sitelinks: BTreeSet<String>,
}

impl HumanRecord {
    pub fn new(id: EntityId) -> Self {
        Self {
            id,
            gender: GenderClass::Unknown,
            birth: None,
            death: None,
            place_of_birth: None,
            citizenships: BTreeSet::new(),
            ethnic_groups: BTreeSet::new(),
            country: None,
            sitelinks: BTreeSet::new(),
        }
    }

    pub fn birth_year(&self) -> Option<i64> {
        self.birth.and_then(|b| b.bucketable())
    }

    pub fn death_year(&self) -> Option<i64> {
        self.death.and_then(|d| d.bucketable())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaceRecord {
    pub id: EntityId,
    pub is_country: bool,
    pub containing_country: Option<EntityId>,
}

/// Article title of one sitelink, kept beside the records file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SitelinkTitle {
    pub id: EntityId,
    pub wiki: String,
    pub title: String,
}

/// A site code counts as a Wikipedia edition if it is lowercase, ends in `wiki`
/// and is not one of the excluded project codes.
pub fn is_wikipedia_code(code: &str, excluded: &BTreeSet<String>) -> bool {
    code.len() > 4
        && code.ends_with("wiki")
        && code
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        && !excluded.contains(code)
}
