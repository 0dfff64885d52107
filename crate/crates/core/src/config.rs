//! Property and value identifiers the ingest keys on.
//!
//! The text format is one `key = value` per line, `#` comments allowed. List
//! values are comma separated. Every key has a Wikidata default, so a file only
//! needs the keys it overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::ConfigError;
use crate::gender::GenderClass;
use crate::ids::{EntityId, PropertyId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyConfig {
    pub instance_of: PropertyId,
    pub gender: PropertyId,
    pub birth_date: PropertyId,
    pub death_date: PropertyId,
    pub place_of_birth: PropertyId,
    pub citizenship: PropertyId,
    pub ethnic_group: PropertyId,
    pub country: PropertyId,
    pub human: EntityId,
    pub country_classes: BTreeSet<EntityId>,
    pub gender_values: BTreeMap<EntityId, GenderClass>,
    /// Gender values outside the named classes that still count as nonbinary.
    pub nonbinary_values: BTreeSet<EntityId>,
    /// Site codes ending in `wiki` that are not Wikipedia editions.
    pub excluded_sites: BTreeSet<String>,
}

fn p(s: &str) -> PropertyId {
    s.parse().expect("static property id")
}

fn q(s: &str) -> EntityId {
    s.parse().expect("static entity id")
}

const DEFAULT_GENDERS: &[(&str, GenderClass)] = &[
    ("Q6581097", GenderClass::Male),
    ("Q15145778", GenderClass::Male),
    ("Q6581072", GenderClass::Female),
    ("Q15145779", GenderClass::Female),
    ("Q1052281", GenderClass::TransgenderFemale),
    ("Q2449503", GenderClass::TransgenderMale),
    ("Q1097630", GenderClass::Intersex),
    ("Q48270", GenderClass::Genderqueer),
    ("Q1399232", GenderClass::Faafafine),
    ("Q746411", GenderClass::Kathoey),
];

const DEFAULT_NONBINARY: &[&str] = &["Q505371", "Q18116794", "Q859614", "Q1289754", "Q179294"];

const DEFAULT_EXCLUDED_SITES: &[&str] = &[
    "commonswiki",
    "specieswiki",
    "metawiki",
    "wikidatawiki",
    "mediawikiwiki",
    "sourceswiki",
    "outreachwiki",
    "wikimaniawiki",
    "foundationwiki",
    "incubatorwiki",
    "testwiki",
    "test2wiki",
    "strategywiki",
    "wikifunctionswiki",
];

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            instance_of: p("P31"),
            gender: p("P21"),
            birth_date: p("P569"),
            death_date: p("P570"),
            place_of_birth: p("P19"),
            citizenship: p("P27"),
            ethnic_group: p("P172"),
            country: p("P17"),
            human: q("Q5"),
            country_classes: [q("Q6256"), q("Q3624078")].into(),
            gender_values: DEFAULT_GENDERS.iter().map(|&(id, g)| (q(id), g)).collect(),
            nonbinary_values: DEFAULT_NONBINARY.iter().map(|id| q(id)).collect(),
            excluded_sites: DEFAULT_EXCLUDED_SITES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl PropertyConfig {
    /// Classify a gender value. Unlisted values are `OtherNonbinary` when flagged,
    /// otherwise `Unknown`.
    pub fn gender_for(&self, value: EntityId) -> GenderClass {
        if let Some(&g) = self.gender_values.get(&value) {
            g
        } else if self.nonbinary_values.contains(&value) {
            GenderClass::OtherNonbinary(value)
        } else {
            GenderClass::Unknown
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Line {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|message| ConfigError::Line {
                    line: idx + 1,
                    message,
                })?;
        }
        Ok(())
    }

    /// Override a single key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn prop(v: &str) -> Result<PropertyId, String> {
            v.parse().map_err(|e: crate::error::IdError| e.to_string())
        }
        fn items(v: &str) -> Result<BTreeSet<EntityId>, String> {
            list(v)
                .map(|s| s.parse().map_err(|e: crate::error::IdError| e.to_string()))
                .collect()
        }
        fn list(v: &str) -> impl Iterator<Item = &str> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty())
        }
        match key {
            "instance_of" => self.instance_of = prop(value)?,
            "gender" => self.gender = prop(value)?,
            "birth_date" => self.birth_date = prop(value)?,
            "death_date" => self.death_date = prop(value)?,
            "place_of_birth" => self.place_of_birth = prop(value)?,
            "citizenship" => self.citizenship = prop(value)?,
            "ethnic_group" => self.ethnic_group = prop(value)?,
            "country" => self.country = prop(value)?,
            "human" => {
                self.human = value
                    .parse()
                    .map_err(|e: crate::error::IdError| e.to_string())?
            }
            "country_classes" => self.country_classes = items(value)?,
            "nonbinary_values" => self.nonbinary_values = items(value)?,
            "excluded_sites" => self.excluded_sites = list(value).map(str::to_string).collect(),
            _ => {
                let Some(code) = key.strip_prefix("gender.") else {
                    return Err(format!("unknown key `{key}`"));
                };
                let class: GenderClass = code
                    .parse()
                    .map_err(|e: crate::error::ParseValueError| e.to_string())?;
                if matches!(class, GenderClass::Unknown | GenderClass::OtherNonbinary(_)) {
                    return Err(format!("`{key}` cannot be assigned value ids"));
                }
                let ids = items(value)?;
                self.gender_values.retain(|_, g| *g != class);
                for id in ids {
                    self.gender_values.insert(id, class);
                }
            }
        }
        Ok(())
    }
}
