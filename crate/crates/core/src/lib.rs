//! Biography extraction from Wikidata dumps and the gender-inequality indicators
//! computed over it.

pub mod atlas;
pub mod celebrity;
pub mod config;
pub mod error;
pub mod fetch;
pub mod gender;
pub mod ids;
pub mod indicators;
pub mod ingest;
pub mod inputs;
pub mod places;
pub mod record;
pub mod records_io;

pub use atlas::{
    consensus_culture, language_culture, load_atlas, ConsensusOutcome, CultureAtlas, CultureCluster,
};
pub use config::PropertyConfig;
pub use error::*;
pub use gender::{GenderClass, GenderGroup};
pub use ids::{EntityId, PropertyId};
pub use ingest::{stream_entities, Collector, EntitySink, IngestStats, StreamOptions};
pub use places::{resolve_country, PlaceIndex, ResolutionStats};
pub use record::{DatePrecision, HumanRecord, PlaceRecord, SitelinkTitle, YearValue};
pub use records_io::{read_records, read_titles, write_records, write_titles};
