//! The records CSV and its companion sitelink-titles CSV.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::RecordsError;
use crate::gender::GenderClass;
use crate::ids::EntityId;
use crate::record::{DatePrecision, HumanRecord, SitelinkTitle, YearValue};

pub const RECORD_COLUMNS: [&str; 11] = [
    "qid",
    "gender",
    "birth_year",
    "birth_precision",
    "death_year",
    "death_precision",
    "pob_qid",
    "country_qid",
    "citizen_qids",
    "ethnic_qids",
    "sitelinks",
];

pub const TITLE_COLUMNS: [&str; 3] = ["qid", "wiki", "title"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordsError + '_ {
    move |source| RecordsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn joined<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Write records sorted by numeric id. Returns the number of rows.
pub fn write_records_to<W: Write>(records: &[HumanRecord], out: W) -> Result<usize, RecordsError> {
    let mut sorted: Vec<&HumanRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.id);
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |row: u64| move |source| RecordsError::Csv { row, source };
    w.write_record(RECORD_COLUMNS).map_err(csv_err(1))?;
    for (i, r) in sorted.iter().enumerate() {
        let row = [
            r.id.to_string(),
            r.gender.code(),
            opt(r.birth.map(|b| b.year)),
            opt(r.birth.map(|b| b.precision)),
            opt(r.death.map(|d| d.year)),
            opt(r.death.map(|d| d.precision)),
            opt(r.place_of_birth),
            opt(r.country),
            joined(&r.citizenships),
            joined(&r.ethnic_groups),
            joined(&r.sitelinks),
        ];
        w.write_record(&row).map_err(csv_err(i as u64 + 2))?;
    }
    w.flush().map_err(|source| RecordsError::Csv {
        row: sorted.len() as u64 + 1,
        source: source.into(),
    })?;
    Ok(sorted.len())
}

pub fn write_records(records: &[HumanRecord], path: &Path) -> Result<usize, RecordsError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    let n = write_records_to(records, &mut buf)?;
    buf.flush().map_err(io_err(path))?;
    Ok(n)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), RecordsError> {
    let found_cols: Vec<&str> = found.iter().collect();
    if found_cols == expected {
        return Ok(());
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|c| !found_cols.contains(c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(RecordsError::MissingColumns { missing });
    }
    Err(RecordsError::UnexpectedHeader {
        found: found_cols.join(","),
    })
}

fn parse_id(field: &str, row: u64, column: &str) -> Result<EntityId, RecordsError> {
    field
        .parse()
        .map_err(|e: crate::error::IdError| RecordsError::Malformed {
            row,
            message: format!("{column}: {e}"),
        })
}

fn parse_opt_id(field: &str, row: u64, column: &str) -> Result<Option<EntityId>, RecordsError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_id(field, row, column).map(Some)
    }
}

fn parse_ids(field: &str, row: u64, column: &str) -> Result<BTreeSet<EntityId>, RecordsError> {
    if field.is_empty() {
        return Ok(BTreeSet::new());
    }
    field.split('|').map(|s| parse_id(s, row, column)).collect()
}

fn parse_year(
    year: &str,
    precision: &str,
    row: u64,
    column: &str,
) -> Result<Option<YearValue>, RecordsError> {
    let malformed = |message: String| RecordsError::Malformed { row, message };
    match (year.is_empty(), precision.is_empty()) {
        (true, true) => Ok(None),
        (false, false) => {
            let y: i64 = year
                .parse()
                .map_err(|_| malformed(format!("{column}: bad year `{year}`")))?;
            let p: DatePrecision = precision
                .parse()
                .map_err(|e| malformed(format!("{column}: {e}")))?;
            Ok(Some(YearValue::new(y, p)))
        }
        _ => Err(malformed(format!(
            "{column}: year and precision must both be set or both empty"
        ))),
    }
}

/// Read records; `row` numbers in errors count the header as row 1.
pub fn read_records_from<R: Read>(input: R) -> Result<Vec<HumanRecord>, RecordsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr
        .headers()
        .map_err(|source| RecordsError::Csv { row: 1, source })?
        .clone();
    check_header(&header, &RECORD_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|source| RecordsError::Csv { row, source })?;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let id = parse_id(f(0), row, "qid")?;
        if !seen.insert(id) {
            return Err(RecordsError::DuplicateId {
                row,
                id: id.to_string(),
            });
        }
        let gender: GenderClass =
            f(1).parse()
                .map_err(|e: crate::error::ParseValueError| RecordsError::Malformed {
                    row,
                    message: format!("gender: {e}"),
                })?;
        let sitelinks: BTreeSet<String> = if f(10).is_empty() {
            BTreeSet::new()
        } else {
            f(10).split('|').map(str::to_string).collect()
        };
        if let Some(bad) = sitelinks
            .iter()
            .find(|s| !s.ends_with("wiki") || s.to_lowercase() != **s)
        {
            return Err(RecordsError::Malformed {
                row,
                message: format!("sitelinks: `{bad}` is not a lowercase wiki code"),
            });
        }
        out.push(HumanRecord {
            id,
            gender,
            birth: parse_year(f(2), f(3), row, "birth")?,
            death: parse_year(f(4), f(5), row, "death")?,
            place_of_birth: parse_opt_id(f(6), row, "pob_qid")?,
            country: parse_opt_id(f(7), row, "country_qid")?,
            citizenships: parse_ids(f(8), row, "citizen_qids")?,
            ethnic_groups: parse_ids(f(9), row, "ethnic_qids")?,
            sitelinks,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<HumanRecord>, RecordsError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_records_from(BufReader::new(file))
}

/// Write sitelink titles sorted by (id, wiki).
pub fn write_titles_to<W: Write>(titles: &[SitelinkTitle], out: W) -> Result<usize, RecordsError> {
    let mut sorted: Vec<&SitelinkTitle> = titles.iter().collect();
    sorted.sort();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TITLE_COLUMNS)
        .map_err(|source| RecordsError::Csv { row: 1, source })?;
    for (i, t) in sorted.iter().enumerate() {
        w.write_record([t.id.to_string().as_str(), &t.wiki, &t.title])
            .map_err(|source| RecordsError::Csv {
                row: i as u64 + 2,
                source,
            })?;
    }
    w.flush().map_err(|source| RecordsError::Csv {
        row: sorted.len() as u64 + 1,
        source: source.into(),
    })?;
    Ok(sorted.len())
}

pub fn write_titles(titles: &[SitelinkTitle], path: &Path) -> Result<usize, RecordsError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    let n = write_titles_to(titles, &mut buf)?;
    buf.flush().map_err(io_err(path))?;
    Ok(n)
}

pub fn read_titles_from<R: Read>(input: R) -> Result<Vec<SitelinkTitle>, RecordsError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr
        .headers()
        .map_err(|source| RecordsError::Csv { row: 1, source })?
        .clone();
    check_header(&header, &TITLE_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|source| RecordsError::Csv { row, source })?;
        out.push(SitelinkTitle {
            id: parse_id(&rec[0], row, "qid")?,
            wiki: rec[1].to_string(),
            title: rec[2].to_string(),
        });
    }
    Ok(out)
}

pub fn read_titles(path: &Path) -> Result<Vec<SitelinkTitle>, RecordsError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_titles_from(BufReader::new(file))
}
