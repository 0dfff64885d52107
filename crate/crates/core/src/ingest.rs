//! Streaming extraction of humans and places from a Wikidata JSON dump.
//!
//! Accepts both the line-delimited form and the array-wrapped dump (`[`, one
//! entity per line with a trailing comma, `]`). Each line is parsed on its own,
//! so memory stays proportional to the largest entity (times the batch size when
//! parsing in parallel).

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::config::PropertyConfig;
use crate::error::IngestError;
use crate::gender::GenderClass;
use crate::ids::EntityId;
use crate::record::{
    is_wikipedia_code, DatePrecision, HumanRecord, PlaceRecord, SitelinkTitle, YearValue,
};

/// Malformed line numbers kept verbatim in [`IngestStats`]; the count keeps going.
const MALFORMED_DETAIL_LIMIT: usize = 100;

/// Receives classified entities in dump order.
pub trait EntitySink {
    fn human(&mut self, record: HumanRecord, titles: Vec<SitelinkTitle>);
    fn place(&mut self, place: PlaceRecord);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamOptions {
    /// Abort on the first malformed line instead of counting it.
    pub strict: bool,
    /// Parser threads; 1 parses inline.
    pub threads: usize,
    /// Lines handed to the parser pool at once when `threads > 1`.
    pub batch_lines: usize,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            strict: false,
            threads: 1,
            batch_lines: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedLine {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub entities_seen: u64,
    pub humans: u64,
    pub places: u64,
    pub skipped: u64,
    pub malformed: u64,
    pub malformed_lines: Vec<MalformedLine>,
    /// Humans whose top-ranked gender claims disagree; the first one was used.
    pub gender_ties: u64,
    /// Gender values neither configured nor flagged nonbinary (mapped to unknown).
    pub unmapped_gender_values: u64,
    /// Birth or death dates kept but coarser than a year.
    pub coarse_dates: u64,
    pub bytes_read: u64,
}

/// Sink that keeps everything in memory: records, sitelink titles and the place index.
#[derive(Debug, Default)]
pub struct Collector {
    pub humans: Vec<HumanRecord>,
    pub titles: Vec<SitelinkTitle>,
    pub places: crate::places::PlaceIndex,
}

impl EntitySink for Collector {
    fn human(&mut self, record: HumanRecord, titles: Vec<SitelinkTitle>) {
        self.humans.push(record);
        self.titles.extend(titles);
    }

    fn place(&mut self, place: PlaceRecord) {
        self.places.insert(place);
    }
}

#[derive(Debug)]
enum Parsed {
    Human {
        record: HumanRecord,
        titles: Vec<SitelinkTitle>,
        gender_tie: bool,
        unmapped_gender: bool,
        coarse_dates: u64,
    },
    Place(PlaceRecord),
    Skipped,
    Malformed(String),
}

/// Stream a dump, classifying every entity and feeding humans and places to `sink`.
pub fn stream_entities<R: BufRead, S: EntitySink>(
    mut reader: R,
    config: &PropertyConfig,
    sink: &mut S,
    options: &StreamOptions,
) -> Result<IngestStats, IngestError> {
    let mut stats = IngestStats::default();
    let pool = if options.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .map_err(|e| IngestError::Io {
                    offset: 0,
                    source: std::io::Error::other(e),
                })?,
        )
    } else {
        None
    };
    let batch_size = if pool.is_some() {
        options.batch_lines.max(1)
    } else {
        1
    };

    let mut buf = Vec::new();
    let mut offset = 0u64;
    let mut line_no = 0u64;
    let mut batch: Vec<(u64, String)> = Vec::with_capacity(batch_size);
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|source| IngestError::Io { offset, source })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let text = std::str::from_utf8(&buf).map_err(|e| IngestError::InvalidUtf8 {
            offset: offset + e.valid_up_to() as u64,
        })?;
        offset += n as u64;
        let Some(entity) = entity_slice(text, line_no == 1) else {
            continue;
        };
        if batch_size == 1 {
            let parsed = parse_entity(entity, config);
            emit(line_no, parsed, sink, &mut stats, options.strict)?;
        } else {
            batch.push((line_no, entity.to_string()));
            if batch.len() == batch_size {
                flush(
                    &mut batch,
                    pool.as_ref(),
                    config,
                    sink,
                    &mut stats,
                    options.strict,
                )?;
            }
        }
    }
    flush(
        &mut batch,
        pool.as_ref(),
        config,
        sink,
        &mut stats,
        options.strict,
    )?;
    stats.bytes_read = offset;
    Ok(stats)
}

fn flush<S: EntitySink>(
    batch: &mut Vec<(u64, String)>,
    pool: Option<&rayon::ThreadPool>,
    config: &PropertyConfig,
    sink: &mut S,
    stats: &mut IngestStats,
    strict: bool,
) -> Result<(), IngestError> {
    if batch.is_empty() {
        return Ok(());
    }
    let parsed: Vec<Parsed> = match pool {
        Some(pool) => pool.install(|| {
            batch
                .par_iter()
                .map(|(_, line)| parse_entity(line, config))
                .collect()
        }),
        None => batch
            .iter()
            .map(|(_, line)| parse_entity(line, config))
            .collect(),
    };
    for ((line_no, _), p) in batch.iter().zip(parsed) {
        emit(*line_no, p, sink, stats, strict)?;
    }
    batch.clear();
    Ok(())
}

fn emit<S: EntitySink>(
    line: u64,
    parsed: Parsed,
    sink: &mut S,
    stats: &mut IngestStats,
    strict: bool,
) -> Result<(), IngestError> {
    stats.entities_seen += 1;
    match parsed {
        Parsed::Human {
            record,
            titles,
            gender_tie,
            unmapped_gender,
            coarse_dates,
        } => {
            stats.humans += 1;
            stats.gender_ties += u64::from(gender_tie);
            stats.unmapped_gender_values += u64::from(unmapped_gender);
            stats.coarse_dates += coarse_dates;
            sink.human(record, titles);
        }
        Parsed::Place(place) => {
            stats.places += 1;
            sink.place(place);
        }
        Parsed::Skipped => stats.skipped += 1,
        Parsed::Malformed(message) => {
            if strict {
                return Err(IngestError::Malformed { line, message });
            }
            stats.malformed += 1;
            if stats.malformed_lines.len() < MALFORMED_DETAIL_LIMIT {
                stats.malformed_lines.push(MalformedLine { line, message });
            }
        }
    }
    Ok(())
}

/// Strip array punctuation and whitespace; `None` for structural or blank lines.
fn entity_slice(line: &str, first_line: bool) -> Option<&str> {
    let mut s = line.trim();
    if first_line {
        s = s.trim_start_matches('\u{feff}').trim();
    }
    s = s.strip_prefix('[').unwrap_or(s).trim_start();
    s = s.strip_suffix(']').map_or(s, str::trim_end);
    s = s.strip_suffix(',').map_or(s, str::trim_end);
    (!s.is_empty()).then_some(s)
}

#[derive(Deserialize)]
struct RawEntity<'a> {
    #[serde(borrow)]
    id: Cow<'a, str>,
    #[serde(default, borrow)]
    claims: Option<&'a RawValue>,
    #[serde(default, borrow)]
    sitelinks: Option<&'a RawValue>,
}

#[derive(Deserialize)]
struct RawClaim<'a> {
    #[serde(borrow)]
    mainsnak: RawSnak<'a>,
    #[serde(default, borrow)]
    rank: Option<Cow<'a, str>>,
}

#[derive(Deserialize)]
struct RawSnak<'a> {
    #[serde(default, borrow)]
    datavalue: Option<RawDataValue<'a>>,
}

#[derive(Deserialize)]
struct RawDataValue<'a> {
    #[serde(borrow)]
    value: &'a RawValue,
}

#[derive(Deserialize)]
struct RawItemValue<'a> {
    #[serde(default, borrow)]
    id: Option<Cow<'a, str>>,
    #[serde(default, rename = "numeric-id")]
    numeric_id: Option<u64>,
}

#[derive(Deserialize)]
struct RawTimeValue<'a> {
    #[serde(borrow)]
    time: Cow<'a, str>,
    precision: i64,
}

#[derive(Deserialize)]
struct RawSitelink<'a> {
    #[serde(borrow)]
    title: Cow<'a, str>,
}

type Claims<'a> = HashMap<Cow<'a, str>, Vec<RawClaim<'a>>>;

/// Wikibase serializes empty maps as `[]`.
fn parse_map<'a, T: Deserialize<'a>>(
    raw: Option<&'a RawValue>,
) -> Result<HashMap<Cow<'a, str>, T>, serde_json::Error> {
    match raw {
        None => Ok(HashMap::new()),
        Some(raw) if raw.get().trim_start().starts_with('[') => {
            let items: Vec<serde::de::IgnoredAny> = serde_json::from_str(raw.get())?;
            if items.is_empty() {
                Ok(HashMap::new())
            } else {
                Err(serde::de::Error::custom(
                    "expected an object, found a non-empty array",
                ))
            }
        }
        Some(raw) => serde_json::from_str(raw.get()),
    }
}

fn rank_weight(rank: Option<&str>) -> Option<u8> {
    match rank {
        Some("preferred") => Some(2),
        Some("normal") | None => Some(1),
        _ => None,
    }
}

/// Claims for `property` at the best non-deprecated rank, in dump order.
fn best_rank<'c, 'a>(claims: &'c Claims<'a>, property: &str) -> Vec<&'c RawClaim<'a>> {
    let Some(list) = claims.get(property) else {
        return Vec::new();
    };
    let best = list
        .iter()
        .filter_map(|c| rank_weight(c.rank.as_deref()))
        .max();
    match best {
        Some(best) => list
            .iter()
            .filter(|c| rank_weight(c.rank.as_deref()) == Some(best))
            .collect(),
        None => Vec::new(),
    }
}

fn item_value(claim: &RawClaim<'_>) -> Result<Option<EntityId>, String> {
    let Some(dv) = &claim.mainsnak.datavalue else {
        return Ok(None);
    };
    let v: RawItemValue =
        serde_json::from_str(dv.value.get()).map_err(|e| format!("item value: {e}"))?;
    match (v.id, v.numeric_id) {
        (Some(id), _) if id.starts_with('Q') => {
            id.parse::<EntityId>().map(Some).map_err(|e| e.to_string())
        }
        (Some(_), _) => Ok(None),
        (None, Some(n)) => Ok(EntityId::new(n)),
        (None, None) => Err("item value without id".into()),
    }
}

fn item_values(claims: &[&RawClaim<'_>]) -> Result<Vec<EntityId>, String> {
    let mut out = Vec::with_capacity(claims.len());
    for c in claims {
        if let Some(id) = item_value(c)? {
            out.push(id);
        }
    }
    Ok(out)
}

fn time_value(claims: &[&RawClaim<'_>]) -> Result<Option<YearValue>, String> {
    for c in claims {
        let Some(dv) = &c.mainsnak.datavalue else {
            continue;
        };
        let v: RawTimeValue =
            serde_json::from_str(dv.value.get()).map_err(|e| format!("time value: {e}"))?;
        return parse_wikibase_year(&v.time)
            .map(|year| {
                Some(YearValue::new(
                    year,
                    DatePrecision::from_wikibase(v.precision),
                ))
            })
            .ok_or_else(|| format!("bad timestamp `{}`", v.time));
    }
    Ok(None)
}

/// Signed year of a Wikibase timestamp (`+1887-03-14T00:00:00Z`), converted to
/// astronomical numbering: the source writes 44 BCE as `-0044`, which becomes −43.
pub fn parse_wikibase_year(time: &str) -> Option<i64> {
    let (negative, rest) = match time.as_bytes().first()? {
        b'+' => (false, &time[1..]),
        b'-' => (true, &time[1..]),
        _ => (false, time),
    };
    let digits: &str = rest.split('-').next()?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i64 = digits.parse().ok()?;
    Some(if negative && year > 0 { 1 - year } else { year })
}

fn parse_entity(line: &str, config: &PropertyConfig) -> Parsed {
    match classify(line, config) {
        Ok(p) => p,
        Err(message) => Parsed::Malformed(message),
    }
}

fn classify(line: &str, config: &PropertyConfig) -> Result<Parsed, String> {
    let entity: RawEntity = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if !entity.id.starts_with('Q') {
        return Ok(Parsed::Skipped);
    }
    let id: EntityId = entity
        .id
        .parse()
        .map_err(|e: crate::error::IdError| e.to_string())?;
    let claims: Claims = parse_map(entity.claims).map_err(|e| format!("claims: {e}"))?;

    let instance_key = config.instance_of.to_string();
    let instance_of: BTreeSet<EntityId> = claims
        .get(instance_key.as_str())
        .map(|list| {
            let live: Vec<&RawClaim> = list
                .iter()
                .filter(|c| rank_weight(c.rank.as_deref()).is_some())
                .collect();
            item_values(&live)
        })
        .transpose()?
        .unwrap_or_default()
        .into_iter()
        .collect();

    if instance_of.contains(&config.human) {
        return human(id, &claims, entity.sitelinks, config);
    }

    let is_country = instance_of
        .iter()
        .any(|c| config.country_classes.contains(c));
    let country_claims = best_rank(&claims, &config.country.to_string());
    let containing_country = item_values(&country_claims)?.into_iter().next();
    if is_country || !country_claims.is_empty() {
        return Ok(Parsed::Place(PlaceRecord {
            id,
            is_country,
            containing_country,
        }));
    }
    Ok(Parsed::Skipped)
}

fn human(
    id: EntityId,
    claims: &Claims<'_>,
    sitelinks: Option<&RawValue>,
    config: &PropertyConfig,
) -> Result<Parsed, String> {
    let mut record = HumanRecord::new(id);

    let genders = item_values(&best_rank(claims, &config.gender.to_string()))?;
    let mut gender_tie = false;
    let mut unmapped_gender = false;
    if let Some(&first) = genders.first() {
        record.gender = config.gender_for(first);
        unmapped_gender = record.gender == GenderClass::Unknown;
        gender_tie = genders
            .iter()
            .any(|&g| config.gender_for(g) != record.gender);
    }

    record.birth = time_value(&best_rank(claims, &config.birth_date.to_string()))?;
    record.death = time_value(&best_rank(claims, &config.death_date.to_string()))?;
    let coarse_dates = [record.birth, record.death]
        .iter()
        .flatten()
        .filter(|y| y.precision != DatePrecision::Year)
        .count() as u64;

    record.place_of_birth = item_values(&best_rank(claims, &config.place_of_birth.to_string()))?
        .into_iter()
        .next();
    record.citizenships = item_values(&best_rank(claims, &config.citizenship.to_string()))?
        .into_iter()
        .collect();
    record.ethnic_groups = item_values(&best_rank(claims, &config.ethnic_group.to_string()))?
        .into_iter()
        .collect();

    let links: HashMap<Cow<str>, RawSitelink> =
        parse_map(sitelinks).map_err(|e| format!("sitelinks: {e}"))?;
    let mut titles = Vec::new();
    for (code, link) in links {
        if is_wikipedia_code(&code, &config.excluded_sites) {
            titles.push(SitelinkTitle {
                id,
                wiki: code.to_string(),
                title: link.title.into_owned(),
            });
            record.sitelinks.insert(code.into_owned());
        }
    }
    titles.sort();

    Ok(Parsed::Human {
        record,
        titles,
        gender_tie,
        unmapped_gender,
        coarse_dates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> EntityId {
        s.parse().unwrap()
    }

    fn run(dump: &str) -> (Collector, IngestStats) {
        let mut sink = Collector::default();
        let stats = stream_entities(
            dump.as_bytes(),
            &PropertyConfig::default(),
            &mut sink,
            &StreamOptions::default(),
        )
        .unwrap();
        (sink, stats)
    }

    fn item(prop: &str, id: &str) -> String {
        format!(
            r#""{prop}":[{{"mainsnak":{{"snaktype":"value","property":"{prop}","datavalue":{{"value":{{"entity-type":"item","id":"{id}"}},"type":"wikibase-entityid"}}}},"type":"statement","rank":"normal"}}]"#
        )
    }

    #[test]
    fn female_human() {
        let line = format!(
            r#"{{"type":"item","id":"Q7259","claims":{{{},{}}}}}"#,
            item("P31", "Q5"),
            item("P21", "Q6581072")
        );
        let (sink, stats) = run(&line);
        assert_eq!(stats.humans, 1);
        assert_eq!(sink.humans[0].gender, GenderClass::Female);
        assert_eq!(sink.humans[0].id, q("Q7259"));
    }

    #[test]
    fn country_place() {
        let line = format!(
            r#"{{"type":"item","id":"Q183","claims":{{{}}}}}"#,
            item("P31", "Q6256")
        );
        let (sink, stats) = run(&line);
        assert_eq!(stats.places, 1);
        let place = sink.places.get(q("Q183")).unwrap();
        assert!(place.is_country);
    }

    #[test]
    fn array_wrapped_dump_and_partition() {
        let dump = format!(
            "[\n{{\"type\":\"item\",\"id\":\"Q1\",\"claims\":{{{}}}}},\n{{\"type\":\"item\",\"id\":\"Q64\",\"claims\":{{{}}}}},\n{{\"id\":\"Q2\",\"claims\":[]}},\n{{not json,\n{{\"type\":\"property\",\"id\":\"P31\"}}\n]\n",
            item("P31", "Q5"),
            item("P17", "Q183")
        );
        let (sink, stats) = run(&dump);
        assert_eq!(stats.entities_seen, 5);
        assert_eq!(
            (stats.humans, stats.places, stats.skipped, stats.malformed),
            (1, 1, 2, 1)
        );
        assert_eq!(stats.malformed_lines[0].line, 5);
        assert_eq!(
            sink.places.get(q("Q64")).unwrap().containing_country,
            Some(q("Q183"))
        );
        assert_eq!(sink.humans[0].gender, GenderClass::Unknown);
    }

    #[test]
    fn strict_mode_aborts() {
        let mut sink = Collector::default();
        let opts = StreamOptions {
            strict: true,
            ..Default::default()
        };
        let err = stream_entities(
            "{\"id\":\"Q1\"}\n{oops\n".as_bytes(),
            &PropertyConfig::default(),
            &mut sink,
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 2, .. }));
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let mut bytes = b"{\"id\":\"Q1\"}\n{\"id\":\"Q2".to_vec();
        bytes.push(0xff);
        bytes.extend_from_slice(b"\"}\n");
        let mut sink = Collector::default();
        let err = stream_entities(
            &bytes[..],
            &PropertyConfig::default(),
            &mut sink,
            &StreamOptions::default(),
        )
        .unwrap_err();
        assert!(
            matches!(err, IngestError::InvalidUtf8 { offset: 21 }),
            "{err:?}"
        );
    }

    #[test]
    fn ranks_dates_and_sitelinks() {
        let line = r#"{"id":"Q42","claims":{
            "P31":[{"mainsnak":{"datavalue":{"value":{"numeric-id":5}}},"rank":"normal"}],
            "P21":[{"mainsnak":{"datavalue":{"value":{"id":"Q6581072"}}},"rank":"deprecated"},
                   {"mainsnak":{"datavalue":{"value":{"id":"Q6581097"}}},"rank":"normal"},
                   {"mainsnak":{"datavalue":{"value":{"id":"Q1052281"}}},"rank":"preferred"}],
            "P569":[{"mainsnak":{"datavalue":{"value":{"time":"-0044-00-00T00:00:00Z","precision":9}}},"rank":"normal"}],
            "P570":[{"mainsnak":{"snaktype":"somevalue"},"rank":"normal"},
                    {"mainsnak":{"datavalue":{"value":{"time":"+1900-00-00T00:00:00Z","precision":7}}},"rank":"normal"}],
            "P27":[{"mainsnak":{"datavalue":{"value":{"id":"Q30"}}}},{"mainsnak":{"datavalue":{"value":{"id":"Q145"}}}}]},
            "sitelinks":{"enwiki":{"site":"enwiki","title":"Some One"},"commonswiki":{"site":"commonswiki","title":"x"},"enwikiquote":{"site":"enwikiquote","title":"y"}}}"#
            .replace('\n', "");
        let (sink, stats) = run(&line);
        let h = &sink.humans[0];
        assert_eq!(h.gender, GenderClass::TransgenderFemale);
        assert_eq!(h.birth, Some(YearValue::new(-43, DatePrecision::Year)));
        assert_eq!(h.death, Some(YearValue::new(1900, DatePrecision::Century)));
        assert_eq!(stats.coarse_dates, 1);
        assert_eq!(h.citizenships.len(), 2);
        assert_eq!(h.sitelinks.iter().collect::<Vec<_>>(), vec!["enwiki"]);
        assert_eq!(sink.titles[0].title, "Some One");
    }

    #[test]
    fn gender_tie_takes_first_and_flags() {
        let line = r#"{"id":"Q9","claims":{"P31":[{"mainsnak":{"datavalue":{"value":{"id":"Q5"}}}}],"P21":[{"mainsnak":{"datavalue":{"value":{"id":"Q6581097"}}}},{"mainsnak":{"datavalue":{"value":{"id":"Q6581072"}}}}]}}"#;
        let (sink, stats) = run(line);
        assert_eq!(sink.humans[0].gender, GenderClass::Male);
        assert_eq!(stats.gender_ties, 1);
    }

    #[test]
    fn unmapped_gender_is_unknown_or_nonbinary() {
        let mut config = PropertyConfig::default();
        config.nonbinary_values.insert(q("Q777"));
        for (value, want) in [
            ("Q777", GenderClass::OtherNonbinary(q("Q777"))),
            ("Q778", GenderClass::Unknown),
        ] {
            let line = format!(
                r#"{{"id":"Q3","claims":{{{},{}}}}}"#,
                item("P31", "Q5"),
                item("P21", value)
            );
            let mut sink = Collector::default();
            stream_entities(
                line.as_bytes(),
                &config,
                &mut sink,
                &StreamOptions::default(),
            )
            .unwrap();
            assert_eq!(sink.humans[0].gender, want);
        }
    }

    #[test]
    fn year_parsing() {
        assert_eq!(parse_wikibase_year("+1887-03-14T00:00:00Z"), Some(1887));
        assert_eq!(
            parse_wikibase_year("+00000001887-03-14T00:00:00Z"),
            Some(1887)
        );
        assert_eq!(parse_wikibase_year("-0001-01-01T00:00:00Z"), Some(0));
        assert_eq!(
            parse_wikibase_year("-13798000000-00-00T00:00:00Z"),
            Some(-13_797_999_999)
        );
        assert_eq!(parse_wikibase_year("garbage"), None);
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut dump = String::from("[\n");
        for i in 1..=300 {
            let g = if i % 3 == 0 { "Q6581072" } else { "Q6581097" };
            dump.push_str(&format!(
                r#"{{"id":"Q{i}","claims":{{{},{}}}}},"#,
                item("P31", "Q5"),
                item("P21", g)
            ));
            dump.push('\n');
        }
        dump.push_str("]\n");
        let (seq, seq_stats) = run(&dump);
        let mut par = Collector::default();
        let opts = StreamOptions {
            threads: 4,
            batch_lines: 7,
            ..Default::default()
        };
        let par_stats =
            stream_entities(dump.as_bytes(), &PropertyConfig::default(), &mut par, &opts).unwrap();
        assert_eq!(seq.humans, par.humans);
        assert_eq!(seq_stats, par_stats);
    }
}
