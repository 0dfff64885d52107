//! Readers for the auxiliary CSV tables: external indices, population, article sizes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::InputError;
use crate::ids::EntityId;

/// Country score from an external gender index (GGGI, GDI, SIGI, GEI, ...).
pub type ExternalIndex = BTreeMap<EntityId, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRow {
    pub year: i64,
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeRow {
    pub wiki: String,
    pub title: String,
    pub bytes: u64,
}

fn open(path: &Path) -> Result<BufReader<File>, InputError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| InputError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Iterate rows of a headed CSV whose header must equal `columns`.
fn rows<R: Read>(
    input: R,
    path: &Path,
    columns: &[&str],
    mut each: impl FnMut(u64, &csv::StringRecord) -> Result<(), String>,
) -> Result<(), InputError> {
    let row_err = |row: u64, message: String| InputError::Row {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| row_err(1, e.to_string()))?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != columns {
        return Err(row_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                columns.join(","),
                found.join(",")
            ),
        ));
    }
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| row_err(row, e.to_string()))?;
        each(row, &rec).map_err(|m| row_err(row, m))?;
    }
    Ok(())
}

fn field<T: FromStr>(rec: &csv::StringRecord, k: usize, name: &str) -> Result<T, String> {
    let raw = rec.get(k).unwrap_or("").trim();
    raw.parse()
        .map_err(|_| format!("{name}: cannot parse `{raw}`"))
}

fn finite(v: f64, name: &str) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name}: not a finite number"))
    }
}

pub fn read_external_index_from<R: Read>(
    input: R,
    path: &Path,
) -> Result<ExternalIndex, InputError> {
    let mut out = ExternalIndex::new();
    rows(input, path, &["country_qid", "score"], |_, rec| {
        let id: EntityId = field(rec, 0, "country_qid")?;
        let score = finite(field(rec, 1, "score")?, "score")?;
        if out.insert(id, score).is_some() {
            return Err(format!("duplicate country {id}"));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn read_external_index(path: &Path) -> Result<ExternalIndex, InputError> {
    read_external_index_from(open(path)?, path)
}

pub fn read_population_from<R: Read>(
    input: R,
    path: &Path,
) -> Result<Vec<PopulationRow>, InputError> {
    let mut out = Vec::new();
    rows(input, path, &["year", "population"], |_, rec| {
        let population = finite(field(rec, 1, "population")?, "population")?;
        if population < 0.0 {
            return Err("population: negative".into());
        }
        out.push(PopulationRow {
            year: field(rec, 0, "year")?,
            population,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_population(path: &Path) -> Result<Vec<PopulationRow>, InputError> {
    read_population_from(open(path)?, path)
}

pub fn read_sizes_from<R: Read>(input: R, path: &Path) -> Result<Vec<SizeRow>, InputError> {
    let mut out = Vec::new();
    rows(input, path, &["wiki", "title", "bytes"], |_, rec| {
        out.push(SizeRow {
            wiki: rec.get(0).unwrap_or("").trim().to_string(),
            title: rec.get(1).unwrap_or("").to_string(),
            bytes: field(rec, 2, "bytes")?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_sizes(path: &Path) -> Result<Vec<SizeRow>, InputError> {
    read_sizes_from(open(path)?, path)
}

/// Path used in error messages for in-memory inputs.
pub fn memory_path(name: &str) -> PathBuf {
    PathBuf::from(format!("<{name}>"))
}
