//! `wigi extract`: dump → records.csv, sitelinks.csv, ingest_report.jsonl.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Read};

use rayon::prelude::*;
use serde_json::{json, Value};
use wigi_core::records_io::{write_records_to, write_titles_to};
use wigi_core::{consensus_culture, stream_entities, Collector, ConsensusOutcome, StreamOptions};

use crate::output::{HashingReader, InputEntry, OutDir};
use crate::settings::PipelineConfig;
use crate::{add_input, atlas, property_config, CliError, Warnings};

pub const RECORDS: &str = "records.csv";
pub const SITELINKS: &str = "sitelinks.csv";
pub const INGEST_REPORT: &str = "ingest_report.jsonl";

pub fn extract(cfg: &PipelineConfig, warnings: &mut Warnings) -> Result<(), CliError> {
    let dump = cfg.paths.dump.as_deref().ok_or_else(|| {
        CliError::Usage("extract needs a dump (--dump PATH, or - for stdin)".into())
    })?;
    let props = property_config(cfg)?;
    let atlas = atlas(cfg)?;
    let mut out = OutDir::create(&cfg.out)?;
    let mut inputs = BTreeMap::new();

    let source: Box<dyn Read> = if dump.as_os_str() == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(File::open(dump).map_err(|_| CliError::MissingInput {
            what: "dump".into(),
            path: dump.to_path_buf(),
        })?)
    };
    let mut hashing = HashingReader::new(source);
    let mut sink = Collector::default();
    let options = StreamOptions {
        strict: cfg.strict,
        threads: cfg.threads,
        ..StreamOptions::default()
    };
    let stats = stream_entities(
        BufReader::with_capacity(1 << 20, &mut hashing),
        &props,
        &mut sink,
        &options,
    )?;
    inputs.insert(
        "dump".to_string(),
        InputEntry {
            path: out.display(dump),
            sha256: hashing.digest(),
        },
    );
    if let Some(p) = &cfg.paths.properties {
        add_input(&mut inputs, &out, "properties", p)?;
    }
    if let Some((e, l)) = &cfg.paths.atlas {
        add_input(&mut inputs, &out, "atlas_entities", e)?;
        add_input(&mut inputs, &out, "atlas_languages", l)?;
    }

    let Collector {
        mut humans,
        titles,
        places,
    } = sink;
    let resolution = places.assign_countries(&mut humans);
    let outcomes: BTreeMap<&str, u64> = humans
        .par_iter()
        .map(|r| consensus_culture(r, &atlas).1)
        .fold(BTreeMap::new, |mut m, o| {
            *m.entry(o.as_str()).or_insert(0) += 1;
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let mut buf = Vec::new();
    write_records_to(&humans, &mut buf).map_err(|source| CliError::Records {
        path: out.path(RECORDS),
        source,
    })?;
    out.write(RECORDS, &buf)?;
    buf.clear();
    write_titles_to(&titles, &mut buf).map_err(|source| CliError::Records {
        path: out.path(SITELINKS),
        source,
    })?;
    out.write(SITELINKS, &buf)?;

    let mut ingest = serde_json::to_value(&stats).map_err(|e| CliError::Internal(e.to_string()))?;
    ingest["stage"] = json!("ingest");
    let mut culture = json!({ "stage": "culture" });
    for o in [
        ConsensusOutcome::Unanimous,
        ConsensusOutcome::Majority,
        ConsensusOutcome::Conflicted,
        ConsensusOutcome::NoData,
    ] {
        culture[o.as_str()] = json!(outcomes.get(o.as_str()).copied().unwrap_or(0));
    }
    let lines: Vec<Value> = vec![
        ingest,
        json!({
            "stage": "places",
            "places": places.len(),
            "resolved": resolution.resolved,
            "no_birthplace": resolution.no_birthplace,
            "unresolved": resolution.unresolved,
        }),
        culture,
    ];
    let mut report = Vec::new();
    for line in &lines {
        serde_json::to_writer(&mut report, line).map_err(|e| CliError::Internal(e.to_string()))?;
        report.push(b'\n');
    }
    out.write(INGEST_REPORT, &report)?;

    if stats.malformed > 0 {
        let first = stats.malformed_lines.first().map_or(0, |m| m.line);
        warnings.push(format!(
            "{} malformed dump line(s) skipped, first on line {first}",
            stats.malformed
        ));
    }
    if stats.gender_ties > 0 {
        warnings.push(format!(
            "{} record(s) with conflicting top-rank gender values",
            stats.gender_ties
        ));
    }
    if stats.unmapped_gender_values > 0 {
        warnings.push(format!(
            "{} gender value(s) outside the property configuration, read as unknown",
            stats.unmapped_gender_values
        ));
    }
    eprintln!(
        "extracted {} humans and {} places from {} entities",
        stats.humans, stats.places, stats.entities_seen
    );
    let settings = json!({ "strict": cfg.strict, "property_overrides": cfg.property_overrides });
    crate::output::update_manifest(&mut out, "extract", &settings, &inputs, warnings.as_slice())
}
