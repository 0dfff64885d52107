use std::fmt;
use std::str::FromStr;

use crate::error::ParseValueError;
use crate::ids::EntityId;

/// Gender value of a biography as recorded in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenderClass {
    Male,
    Female,
    TransgenderFemale,
    TransgenderMale,
    Intersex,
    Genderqueer,
    Faafafine,
    Kathoey,
    /// Any other value the property configuration flags as nonbinary.
    OtherNonbinary(EntityId),
    Unknown,
}

/// Reporting group used by the ratio indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenderGroup {
    Male,
    Female,
    Nonbinary,
}

impl GenderClass {
    /// The eight named classes, in display order.
    pub const NAMED: [GenderClass; 8] = [
        GenderClass::Male,
        GenderClass::Female,
        GenderClass::TransgenderFemale,
        GenderClass::TransgenderMale,
        GenderClass::Intersex,
        GenderClass::Genderqueer,
        GenderClass::Faafafine,
        GenderClass::Kathoey,
    ];

    pub fn is_known(self) -> bool {
        self != GenderClass::Unknown
    }

    pub fn is_nonbinary(self) -> bool {
        !matches!(
            self,
            GenderClass::Male | GenderClass::Female | GenderClass::Unknown
        )
    }

    pub fn group(self) -> Option<GenderGroup> {
        match self {
            GenderClass::Male => Some(GenderGroup::Male),
            GenderClass::Female => Some(GenderGroup::Female),
            GenderClass::Unknown => None,
            _ => Some(GenderGroup::Nonbinary),
        }
    }

    /// Stable lowercase code used in the records file and configuration keys.
    pub fn code(self) -> String {
        match self {
            GenderClass::OtherNonbinary(id) => format!("nonbinary:{id}"),
            named => named.static_code().to_string(),
        }
    }

    fn static_code(self) -> &'static str {
        match self {
            GenderClass::Male => "male",
            GenderClass::Female => "female",
            GenderClass::TransgenderFemale => "transgender_female",
            GenderClass::TransgenderMale => "transgender_male",
            GenderClass::Intersex => "intersex",
            GenderClass::Genderqueer => "genderqueer",
            GenderClass::Faafafine => "faafafine",
            GenderClass::Kathoey => "kathoey",
            GenderClass::OtherNonbinary(_) => "nonbinary",
            GenderClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for GenderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for GenderClass {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(id) = s.strip_prefix("nonbinary:") {
            return id
                .parse()
                .map(GenderClass::OtherNonbinary)
                .map_err(|_| ParseValueError::new("gender", s));
        }
        GenderClass::NAMED
            .iter()
            .chain(&[GenderClass::Unknown])
            .copied()
            .find(|g| g.static_code() == s)
            .ok_or_else(|| ParseValueError::new("gender", s))
    }
}

impl fmt::Display for GenderGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenderGroup::Male => "male",
            GenderGroup::Female => "female",
            GenderGroup::Nonbinary => "nonbinary",
        })
    }
}
