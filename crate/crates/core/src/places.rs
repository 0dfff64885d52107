//! Birthplace to country resolution.

use std::collections::HashMap;

use serde::Serialize;

use crate::ids::EntityId;
use crate::record::{HumanRecord, PlaceRecord};

#[derive(Debug, Clone, Default)]
pub struct PlaceIndex {
    places: HashMap<EntityId, PlaceRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResolutionStats {
    pub resolved: u64,
    pub no_birthplace: u64,
    /// Birthplace set but not a known place, or a place without a country.
    pub unresolved: u64,
}

impl PlaceIndex {
    pub fn insert(&mut self, place: PlaceRecord) {
        self.places.insert(place.id, place);
    }

    pub fn get(&self, id: EntityId) -> Option<&PlaceRecord> {
        self.places.get(&id)
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    /// Fill in `country` on every record, returning how many resolved.
    pub fn assign_countries(&self, records: &mut [HumanRecord]) -> ResolutionStats {
        let mut stats = ResolutionStats::default();
        for r in records {
            r.country = resolve_country(r, self);
            match (r.place_of_birth, r.country) {
                (None, _) => stats.no_birthplace += 1,
                (Some(_), Some(_)) => stats.resolved += 1,
                (Some(_), None) => stats.unresolved += 1,
            }
        }
        stats
    }
}

impl FromIterator<PlaceRecord> for PlaceIndex {
    fn from_iter<I: IntoIterator<Item = PlaceRecord>>(iter: I) -> Self {
        let mut index = Self::default();
        for p in iter {
            index.insert(p);
        }
        index
    }
}

/// One hop only: a country birthplace is its own country, otherwise use the
/// place's containing country.
pub fn resolve_country(record: &HumanRecord, places: &PlaceIndex) -> Option<EntityId> {
    let place = places.get(record.place_of_birth?)?;
    if place.is_country {
        Some(place.id)
    } else {
        place.containing_country
    }
}
