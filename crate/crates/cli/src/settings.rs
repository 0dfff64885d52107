//! Run settings. Each key can come from a flag, a `WIGI_*` environment
//! variable or the `--config` TOML file, in that order of precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use wigi_core::indicators::ScoreKey;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreBy {
    Country,
    Citizenship,
}

impl From<ScoreBy> for ScoreKey {
    fn from(s: ScoreBy) -> Self {
        match s {
            ScoreBy::Country => ScoreKey::Country,
            ScoreBy::Citizenship => ScoreKey::Citizenship,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Output directory
    #[arg(long, global = true, env = "WIGI_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "WIGI_THREADS")]
    pub threads: Option<usize>,
    /// Abort on the first malformed dump line
    #[arg(long, global = true, env = "WIGI_STRICT", num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub strict: Option<bool>,
    /// Never touch the network; read articles from the cache only
    #[arg(long, global = true, env = "WIGI_OFFLINE", num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub offline: Option<bool>,

    /// Wikidata JSON dump, `-` for stdin
    #[arg(long, global = true, env = "WIGI_DUMP")]
    pub dump: Option<PathBuf>,
    /// Property configuration (`key = value` lines)
    #[arg(long, global = true, env = "WIGI_PROPERTIES")]
    pub properties: Option<PathBuf>,
    /// Records file (default: <out>/records.csv)
    #[arg(long, global = true, env = "WIGI_RECORDS")]
    pub records: Option<PathBuf>,
    /// Sitelink titles file (default: <out>/sitelinks.csv)
    #[arg(long, global = true, env = "WIGI_SITELINKS")]
    pub sitelinks: Option<PathBuf>,
    #[arg(long, global = true, env = "WIGI_ATLAS_ENTITIES")]
    pub atlas_entities: Option<PathBuf>,
    #[arg(long, global = true, env = "WIGI_ATLAS_LANGUAGES")]
    pub atlas_languages: Option<PathBuf>,
    /// External index as NAME=PATH; repeatable
    #[arg(
        long,
        global = true,
        env = "WIGI_EXTERNAL",
        value_delimiter = ',',
        value_name = "NAME=PATH"
    )]
    pub external: Option<Vec<String>>,
    #[arg(long, global = true, env = "WIGI_POPULATION")]
    pub population: Option<PathBuf>,
    #[arg(long, global = true, env = "WIGI_SIZES")]
    pub sizes: Option<PathBuf>,
    #[arg(long, global = true, env = "WIGI_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// Article text directory, also the fetch cache
    #[arg(long, global = true, env = "WIGI_CORPUS")]
    pub corpus: Option<PathBuf>,

    #[arg(long, global = true, env = "WIGI_MIN_COUNT")]
    pub min_count: Option<u64>,
    /// First birth decade counted by the national ranking
    #[arg(long, global = true, env = "WIGI_START_DECADE")]
    pub start_decade: Option<i64>,
    #[arg(long, global = true, env = "WIGI_SCORE_BY")]
    pub score_by: Option<ScoreBy>,
    #[arg(long, global = true, env = "WIGI_GRID_START")]
    pub grid_start: Option<i64>,
    #[arg(long, global = true, env = "WIGI_GRID_END")]
    pub grid_end: Option<i64>,
    #[arg(long, global = true, env = "WIGI_GRID_STEP")]
    pub grid_step: Option<i64>,
    #[arg(long, global = true, env = "WIGI_TOP_N_LANGUAGES")]
    pub top_n_languages: Option<usize>,
    #[arg(long, global = true, env = "WIGI_TOP_N_SIZES")]
    pub top_n_sizes: Option<usize>,
    #[arg(long, global = true, env = "WIGI_FIT_FROM")]
    pub fit_from: Option<i64>,
    #[arg(long, global = true, env = "WIGI_FIT_TO")]
    pub fit_to: Option<i64>,
    #[arg(long, global = true, env = "WIGI_PARITY_TARGET")]
    pub parity_target: Option<f64>,
    #[arg(long, global = true, env = "WIGI_CELEBRITY_FROM")]
    pub celebrity_from: Option<i64>,
    #[arg(long, global = true, env = "WIGI_CELEBRITY_TO")]
    pub celebrity_to: Option<i64>,
    /// Characters of article text the probe inspects
    #[arg(long, global = true, env = "WIGI_WINDOW")]
    pub window: Option<usize>,
    /// Match celebrity terms without case folding
    #[arg(long, global = true, env = "WIGI_CASE_SENSITIVE", num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub case_sensitive: Option<bool>,
    /// Wiki absorbed into the regression intercept
    #[arg(long, global = true, env = "WIGI_BASELINE")]
    pub baseline: Option<String>,
    #[arg(long, global = true, env = "WIGI_USER_AGENT")]
    pub user_agent: Option<String>,

    /// Property overrides; only settable from the config file (`[property]` table).
    #[arg(skip)]
    pub property: BTreeMap<String, String>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident; $($f:ident),* $(,)?) => {
        $( if $hi.$f.is_none() { $hi.$f = $lo.$f.take(); } )*
    };
}

macro_rules! rebase {
    ($s:ident, $dir:ident; $($f:ident),* $(,)?) => {
        $( if let Some(p) = $s.$f.take() { $s.$f = Some(join_relative($dir, p)); } )*
    };
}

fn join_relative(dir: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() && p.as_os_str() != "-" {
        dir.join(p)
    } else {
        p
    }
}

impl Settings {
    /// Read a TOML settings file. Relative paths in it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|_| CliError::MissingInput {
            what: "config file".into(),
            path: path.to_path_buf(),
        })?;
        let mut s: Settings = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        rebase!(s, dir; out, dump, properties, records, sitelinks, atlas_entities, atlas_languages,
            population, sizes, lexicon, corpus);
        if let Some(ext) = s.external.take() {
            let mut rebased = Vec::new();
            for spec in ext {
                let (name, p) = split_external(&spec)?;
                rebased.push(format!("{name}={}", join_relative(dir, p).display()));
            }
            s.external = Some(rebased);
        }
        Ok(s)
    }

    /// Fill every unset key from `lower`.
    pub fn overlay(mut self, mut lower: Settings) -> Self {
        overlay!(self, lower; out, threads, strict, offline, dump, properties, records, sitelinks,
            atlas_entities, atlas_languages, external, population, sizes, lexicon, corpus, min_count,
            start_decade, score_by, grid_start, grid_end, grid_step, top_n_languages, top_n_sizes,
            fit_from, fit_to, parity_target, celebrity_from, celebrity_to, window, case_sensitive, baseline, user_agent);
        for (k, v) in lower.property {
            self.property.entry(k).or_insert(v);
        }
        self
    }
}

pub fn split_external(spec: &str) -> Result<(String, PathBuf), CliError> {
    let (name, path) = spec
        .split_once('=')
        .filter(|(n, p)| !n.trim().is_empty() && !p.trim().is_empty())
        .ok_or_else(|| CliError::Config(format!("external index `{spec}` is not NAME=PATH")))?;
    let name = name.trim();
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(CliError::Config(format!(
            "external index name `{name}` may only use letters, digits, `_` and `-`"
        )));
    }
    Ok((name.to_string(), PathBuf::from(path.trim())))
}

/// Settings with defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: usize,
    pub strict: bool,
    pub offline: bool,
    #[serde(skip)]
    pub paths: InputPaths,
    #[serde(skip)]
    pub property_overrides: BTreeMap<String, String>,
    pub min_count: u64,
    pub start_decade: i64,
    pub score_by: ScoreBy,
    pub grid: Vec<i64>,
    pub top_n_languages: usize,
    pub top_n_sizes: usize,
    pub fit_from: i64,
    pub fit_to: i64,
    pub parity_target: f64,
    pub celebrity_from: i64,
    pub celebrity_to: i64,
    pub window: Option<usize>,
    pub case_sensitive: bool,
    pub baseline: String,
    #[serde(skip)]
    pub user_agent: Option<String>,
}

/// Input paths. `records` and `sitelinks` always have a value; `explicit`
/// records which of them the user named.
#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub dump: Option<PathBuf>,
    pub properties: Option<PathBuf>,
    pub records: PathBuf,
    pub sitelinks: PathBuf,
    pub records_explicit: bool,
    pub sitelinks_explicit: bool,
    pub atlas: Option<(PathBuf, PathBuf)>,
    pub external: Vec<(String, PathBuf)>,
    pub population: Option<PathBuf>,
    pub sizes: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
}

pub const DEFAULT_OUT: &str = "wigi-out";

impl PipelineConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let out = s.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let atlas = match (s.atlas_entities, s.atlas_languages) {
            (Some(e), Some(l)) => Some((e, l)),
            (None, None) => None,
            _ => {
                return Err(CliError::Config(
                    "atlas_entities and atlas_languages must be given together".into(),
                ))
            }
        };
        let mut external = Vec::new();
        for spec in s.external.unwrap_or_default() {
            let (name, path) = split_external(&spec)?;
            if external.iter().any(|(n, _)| *n == name) {
                return Err(CliError::Config(format!(
                    "external index `{name}` given twice"
                )));
            }
            external.push((name, path));
        }
        let grid_start = s.grid_start.unwrap_or(1800);
        let grid_end = s.grid_end.unwrap_or(1990);
        let grid_step = s.grid_step.unwrap_or(10);
        if grid_step <= 0 || grid_end < grid_start {
            return Err(CliError::Config(format!(
                "empty calibration grid {grid_start}..={grid_end} step {grid_step}"
            )));
        }
        let celebrity_from = s.celebrity_from.unwrap_or(1930);
        let celebrity_to = s.celebrity_to.unwrap_or(1989);
        let fit_from = s.fit_from.unwrap_or(1800);
        let fit_to = s.fit_to.unwrap_or(1980);
        if celebrity_to < celebrity_from || fit_to < fit_from {
            return Err(CliError::Config("year ranges must not be reversed".into()));
        }
        let parity_target = s.parity_target.unwrap_or(0.5);
        if !(parity_target > 0.0 && parity_target < 1.0) {
            return Err(CliError::Config(format!(
                "parity_target {parity_target} must lie strictly between 0 and 1"
            )));
        }
        let threads = match s.threads {
            Some(0) => return Err(CliError::Config("threads must be at least 1".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(Self {
            threads,
            strict: s.strict.unwrap_or(false),
            offline: s.offline.unwrap_or(false),
            paths: InputPaths {
                dump: s.dump,
                properties: s.properties,
                records_explicit: s.records.is_some(),
                sitelinks_explicit: s.sitelinks.is_some(),
                records: s.records.unwrap_or_else(|| out.join("records.csv")),
                sitelinks: s.sitelinks.unwrap_or_else(|| out.join("sitelinks.csv")),
                atlas,
                external,
                population: s.population,
                sizes: s.sizes,
                lexicon: s.lexicon,
                corpus: s.corpus,
            },
            property_overrides: s.property,
            min_count: s.min_count.unwrap_or(10),
            start_decade: s.start_decade.unwrap_or(grid_start),
            score_by: s.score_by.unwrap_or(ScoreBy::Country),
            grid: (grid_start..=grid_end)
                .step_by(grid_step as usize)
                .collect(),
            top_n_languages: s.top_n_languages.unwrap_or(50),
            top_n_sizes: s.top_n_sizes.unwrap_or(25),
            fit_from,
            fit_to,
            parity_target,
            celebrity_from,
            celebrity_to,
            window: s.window,
            case_sensitive: s.case_sensitive.unwrap_or(false),
            baseline: s
                .baseline
                .unwrap_or_else(|| wigi_core::celebrity::DEFAULT_BASELINE.to_string()),
            user_agent: s.user_agent,
            out,
        })
    }

    /// Every named input must exist when a command starts. The dump `-` is stdin.
    pub fn check_inputs(&self, fetch_cache: bool) -> Result<(), CliError> {
        let p = &self.paths;
        let mut named: Vec<(&str, &Path)> = Vec::new();
        if let Some(d) = p.dump.as_deref().filter(|d| d.as_os_str() != "-") {
            named.push(("dump", d));
        }
        for (what, path) in [
            ("properties", &p.properties),
            ("population", &p.population),
            ("sizes", &p.sizes),
            ("lexicon", &p.lexicon),
        ] {
            if let Some(path) = path {
                named.push((what, path));
            }
        }
        if !fetch_cache {
            if let Some(c) = &p.corpus {
                named.push(("corpus", c));
            }
        }
        if let Some((e, l)) = &p.atlas {
            named.push(("atlas_entities", e));
            named.push(("atlas_languages", l));
        }
        if p.records_explicit {
            named.push(("records", &p.records));
        }
        if p.sitelinks_explicit {
            named.push(("sitelinks", &p.sitelinks));
        }
        for (_, path) in &p.external {
            named.push(("external index", path));
        }
        for (what, path) in named {
            if !path.exists() {
                return Err(CliError::MissingInput {
                    what: what.into(),
                    path: path.to_path_buf(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_higher_layer() {
        let hi = Settings {
            min_count: Some(3),
            ..Default::default()
        };
        let lo = Settings {
            min_count: Some(9),
            top_n_sizes: Some(7),
            property: [("gender".to_string(), "P21".to_string())].into(),
            ..Default::default()
        };
        let merged = hi.overlay(lo);
        assert_eq!(merged.min_count, Some(3));
        assert_eq!(merged.top_n_sizes, Some(7));
        assert_eq!(merged.property.len(), 1);
    }

    #[test]
    fn defaults_and_grid() {
        let c = PipelineConfig::resolve(Settings::default()).unwrap();
        assert_eq!(c.grid.first(), Some(&1800));
        assert_eq!(c.grid.last(), Some(&1990));
        assert_eq!(c.grid.len(), 20);
        assert_eq!((c.top_n_languages, c.top_n_sizes), (50, 25));
        assert_eq!((c.celebrity_from, c.celebrity_to), (1930, 1989));
        assert_eq!(c.paths.records, PathBuf::from("wigi-out/records.csv"));
        assert!(!c.paths.records_explicit);
    }

    #[test]
    fn file_paths_are_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(
            &cfg,
            "dump = \"dump.json\"\nexternal = [\"gei=idx/gei.csv\"]\nmin_count = 4\n[property]\ngender = \"P21\"\n",
        )
        .unwrap();
        let s = Settings::from_file(&cfg).unwrap();
        assert_eq!(s.dump.unwrap(), dir.path().join("dump.json"));
        assert_eq!(
            s.external.unwrap()[0],
            format!("gei={}", dir.path().join("idx/gei.csv").display())
        );
        assert_eq!(s.min_count, Some(4));
        std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
        assert!(matches!(
            Settings::from_file(&cfg),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn bad_values_rejected() {
        for s in [
            Settings {
                grid_step: Some(0),
                ..Default::default()
            },
            Settings {
                threads: Some(0),
                ..Default::default()
            },
            Settings {
                parity_target: Some(1.0),
                ..Default::default()
            },
            Settings {
                atlas_entities: Some("a".into()),
                ..Default::default()
            },
            Settings {
                external: Some(vec!["gei".into()]),
                ..Default::default()
            },
            Settings {
                external: Some(vec!["a=x".into(), "a=y".into()]),
                ..Default::default()
            },
        ] {
            assert!(matches!(
                PipelineConfig::resolve(s),
                Err(CliError::Config(_))
            ));
        }
    }
}
