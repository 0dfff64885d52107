//! Cultural clusters for countries, polities, ethnic groups and wiki editions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{AtlasError, ParseValueError};
use crate::ids::EntityId;
use crate::record::HumanRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CultureCluster {
    EnglishSpeaking,
    LatinAmerica,
    CatholicEurope,
    ProtestantEurope,
    African,
    Islamic,
    SouthAsian,
    Orthodox,
    Confucian,
    /// Constructed languages; only produced by the language map.
    Constructed,
    Unassigned,
}

impl CultureCluster {
    /// The nine geographic clusters.
    pub const NINE: [CultureCluster; 9] = [
        CultureCluster::EnglishSpeaking,
        CultureCluster::LatinAmerica,
        CultureCluster::CatholicEurope,
        CultureCluster::ProtestantEurope,
        CultureCluster::African,
        CultureCluster::Islamic,
        CultureCluster::SouthAsian,
        CultureCluster::Orthodox,
        CultureCluster::Confucian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CultureCluster::EnglishSpeaking => "EnglishSpeaking",
            CultureCluster::LatinAmerica => "LatinAmerica",
            CultureCluster::CatholicEurope => "CatholicEurope",
            CultureCluster::ProtestantEurope => "ProtestantEurope",
            CultureCluster::African => "African",
            CultureCluster::Islamic => "Islamic",
            CultureCluster::SouthAsian => "SouthAsian",
            CultureCluster::Orthodox => "Orthodox",
            CultureCluster::Confucian => "Confucian",
            CultureCluster::Constructed => "Constructed",
            CultureCluster::Unassigned => "Unassigned",
        }
    }
}

impl fmt::Display for CultureCluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CultureCluster {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CultureCluster::NINE
            .into_iter()
            .chain([CultureCluster::Constructed, CultureCluster::Unassigned])
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ParseValueError::new("culture cluster", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConsensusOutcome {
    Unanimous,
    Majority,
    Conflicted,
    NoData,
}

impl ConsensusOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ConsensusOutcome::Unanimous => "unanimous",
            ConsensusOutcome::Majority => "majority",
            ConsensusOutcome::Conflicted => "conflicted",
            ConsensusOutcome::NoData => "no_data",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CultureAtlas {
    entity_map: HashMap<EntityId, CultureCluster>,
    language_map: HashMap<String, CultureCluster>,
    /// Keys seen more than once across both files; the last row won.
    pub duplicate_keys: usize,
}

pub const BUNDLED_ENTITIES: &str = include_str!("../../../data/atlas/entities.tsv");
pub const BUNDLED_LANGUAGES: &str = include_str!("../../../data/atlas/languages.tsv");

/// Yield `(row, key, cluster)` for every non-comment row.
fn rows<'a>(
    text: &'a str,
    source_name: &'a str,
) -> impl Iterator<Item = Result<(usize, &'a str, CultureCluster), AtlasError>> + 'a {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let row = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let mut fields = line.split('\t').map(str::trim).filter(|f| !f.is_empty());
        let (Some(key), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Some(Err(AtlasError::Malformed {
                source_name: source_name.to_string(),
                row,
                message: "expected `key<TAB>cluster`".into(),
            }));
        };
        let cluster = match value.parse::<CultureCluster>() {
            Ok(CultureCluster::Unassigned) | Err(_) => {
                return Some(Err(AtlasError::UnknownCluster {
                    source_name: source_name.to_string(),
                    row,
                    value: value.to_string(),
                }))
            }
            Ok(c) => c,
        };
        Some(Ok((row, key, cluster)))
    })
}

impl CultureAtlas {
    /// Parse both tab-separated maps from memory.
    pub fn parse(
        entities: &str,
        entities_name: &str,
        languages: &str,
        languages_name: &str,
    ) -> Result<Self, AtlasError> {
        let mut atlas = CultureAtlas::default();
        for r in rows(entities, entities_name) {
            let (row, key, cluster) = r?;
            let malformed = |message: String| AtlasError::Malformed {
                source_name: entities_name.to_string(),
                row,
                message,
            };
            let id: EntityId = key
                .parse()
                .map_err(|e: crate::error::IdError| malformed(e.to_string()))?;
            if cluster == CultureCluster::Constructed {
                return Err(malformed("Constructed only applies to languages".into()));
            }
            if atlas.entity_map.insert(id, cluster).is_some() {
                atlas.duplicate_keys += 1;
            }
        }
        for r in rows(languages, languages_name) {
            let (row, key, cluster) = r?;
            if !key.ends_with("wiki") || key.len() <= 4 {
                return Err(AtlasError::Malformed {
                    source_name: languages_name.to_string(),
                    row,
                    message: format!("`{key}` is not a wiki code"),
                });
            }
            if atlas
                .language_map
                .insert(key.to_string(), cluster)
                .is_some()
            {
                atlas.duplicate_keys += 1;
            }
        }
        if atlas.duplicate_keys > 0 {
            log::warn!(
                "{} duplicate atlas keys, last row kept",
                atlas.duplicate_keys
            );
        }
        Ok(atlas)
    }

    /// The reconstruction shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(
            BUNDLED_ENTITIES,
            "entities.tsv",
            BUNDLED_LANGUAGES,
            "languages.tsv",
        )
        .expect("bundled atlas parses")
    }

    pub fn entity(&self, id: EntityId) -> Option<CultureCluster> {
        self.entity_map.get(&id).copied()
    }

    pub fn entity_count(&self) -> usize {
        self.entity_map.len()
    }

    pub fn language_count(&self) -> usize {
        self.language_map.len()
    }
}

pub fn load_atlas(
    entity_map_path: &Path,
    language_map_path: &Path,
) -> Result<CultureAtlas, AtlasError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| AtlasError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let entities = read(entity_map_path)?;
    let languages = read(language_map_path)?;
    CultureAtlas::parse(
        &entities,
        &entity_map_path.display().to_string(),
        &languages,
        &language_map_path.display().to_string(),
    )
}

pub fn language_culture(wiki_code: &str, atlas: &CultureAtlas) -> CultureCluster {
    atlas
        .language_map
        .get(wiki_code)
        .copied()
        .unwrap_or(CultureCluster::Unassigned)
}

/// One variable's vote: the single distinct cluster its mapped values agree on.
/// Unmapped values are ignored; no mapped values or a split both abstain.
pub fn variable_vote(
    values: impl IntoIterator<Item = EntityId>,
    atlas: &CultureAtlas,
) -> Option<CultureCluster> {
    let clusters: BTreeSet<CultureCluster> =
        values.into_iter().filter_map(|v| atlas.entity(v)).collect();
    let mut it = clusters.into_iter();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// Combine up to three votes (`None` = abstain).
pub fn decide_votes(votes: &[Option<CultureCluster>]) -> (CultureCluster, ConsensusOutcome) {
    let cast: Vec<CultureCluster> = votes.iter().flatten().copied().collect();
    let Some(&first) = cast.first() else {
        return (CultureCluster::Unassigned, ConsensusOutcome::NoData);
    };
    if cast.iter().all(|&c| c == first) {
        return (first, ConsensusOutcome::Unanimous);
    }
    let mut counts: HashMap<CultureCluster, usize> = HashMap::new();
    for &c in &cast {
        *counts.entry(c).or_default() += 1;
    }
    match counts.into_iter().find(|&(_, n)| 2 * n > cast.len()) {
        Some((c, _)) => (c, ConsensusOutcome::Majority),
        None => (CultureCluster::Unassigned, ConsensusOutcome::Conflicted),
    }
}

/// Votes from the derived country, the citizenships and the ethnic groups.
pub fn culture_votes(record: &HumanRecord, atlas: &CultureAtlas) -> [Option<CultureCluster>; 3] {
    [
        variable_vote(record.country, atlas),
        variable_vote(record.citizenships.iter().copied(), atlas),
        variable_vote(record.ethnic_groups.iter().copied(), atlas),
    ]
}

pub fn consensus_culture(
    record: &HumanRecord,
    atlas: &CultureAtlas,
) -> (CultureCluster, ConsensusOutcome) {
    decide_votes(&culture_votes(record, atlas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CultureCluster::*;

    fn q(n: u64) -> EntityId {
        EntityId::new(n).unwrap()
    }

    fn atlas() -> CultureAtlas {
        CultureAtlas::parse(
            "# c\nQ183\tProtestantEurope\nQ148\tConfucian # PRC\nQ17\tConfucian\nQ43\tIslamic\nQ159\tOrthodox\n",
            "e",
            "tlwiki\tSouthAsian\neowiki\tConstructed\n",
            "l",
        )
        .unwrap()
    }

    #[test]
    fn loads_rows_and_rejects_unknown_clusters() {
        let a = atlas();
        assert_eq!(a.entity(q(183)), Some(ProtestantEurope));
        assert_eq!(language_culture("tlwiki", &a), SouthAsian);
        assert_eq!(language_culture("xxwiki", &a), Unassigned);
        let err = CultureAtlas::parse("Q1\tAfrican\nQ2\tAtlantis\n", "e", "", "l").unwrap_err();
        assert!(matches!(err, AtlasError::UnknownCluster { row: 2, .. }));
        assert!(CultureAtlas::parse("Q1\tUnassigned\n", "e", "", "l").is_err());
        assert!(CultureAtlas::parse("Q1\tConstructed\n", "e", "", "l").is_err());
    }

    #[test]
    fn duplicates_last_wins() {
        let a = CultureAtlas::parse("Q1\tAfrican\nQ1\tIslamic\n", "e", "", "l").unwrap();
        assert_eq!(a.entity(q(1)), Some(Islamic));
        assert_eq!(a.duplicate_keys, 1);
    }

    #[test]
    fn bundled_atlas_examples() {
        let a = CultureAtlas::bundled();
        assert_eq!(language_culture("zhwiki", &a), Confucian);
        assert_eq!(language_culture("eowiki", &a), Constructed);
        assert_eq!(a.entity(q(183)), Some(ProtestantEurope));
        assert_eq!(a.duplicate_keys, 0);
    }

    #[test]
    fn consensus_examples() {
        assert_eq!(
            decide_votes(&[Some(Confucian), Some(Confucian), None]),
            (Confucian, ConsensusOutcome::Unanimous)
        );
        assert_eq!(
            decide_votes(&[Some(Islamic), Some(Orthodox), None]),
            (Unassigned, ConsensusOutcome::Conflicted)
        );
        assert_eq!(
            decide_votes(&[Some(Islamic), Some(Orthodox), Some(Islamic)]),
            (Islamic, ConsensusOutcome::Majority)
        );
        assert_eq!(
            decide_votes(&[None, None, None]),
            (Unassigned, ConsensusOutcome::NoData)
        );
    }

    #[test]
    fn record_consensus_with_split_variable() {
        let a = atlas();
        let mut r = HumanRecord::new(q(1));
        r.country = Some(q(148));
        r.citizenships = [q(148), q(43)].into();
        r.ethnic_groups = [q(17), q(999)].into();
        assert_eq!(
            culture_votes(&r, &a),
            [Some(Confucian), None, Some(Confucian)]
        );
        assert_eq!(
            consensus_culture(&r, &a),
            (Confucian, ConsensusOutcome::Unanimous)
        );
    }

    proptest! {
        #[test]
        fn vote_ignores_member_order(mut ids in proptest::collection::vec(prop_oneof![Just(183u64), Just(148), Just(17), Just(43), Just(5)], 0..6), seed in any::<u64>()) {
            let a = atlas();
            let before = variable_vote(ids.iter().map(|&n| q(n)), &a);
            let len = ids.len();
            if len > 1 {
                ids.rotate_left((seed as usize) % len);
                ids.reverse();
            }
            prop_assert_eq!(before, variable_vote(ids.iter().map(|&n| q(n)), &a));
        }
    }
}
