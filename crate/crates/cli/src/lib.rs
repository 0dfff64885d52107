//! The `wigi` command line: extract biographies from a Wikidata dump, compute
//! indicator reports, and fetch article text for the celebrity probe.

pub mod error;
pub mod extract;
pub mod fetch;
pub mod output;
pub mod report;
pub mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use wigi_core::{CultureAtlas, PropertyConfig};

pub use error::{CliError, EXIT_INPUT, EXIT_INTERNAL, EXIT_PARSE};
pub use report::ReportKind;
pub use settings::{PipelineConfig, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "wigi",
    version,
    about = "Gender-inequality indicators from Wikidata biographies"
)]
pub struct Cli {
    /// TOML file with settings; keys match the long flag names with `_` for `-`
    #[arg(long, global = true, env = "WIGI_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Extract human records, sitelink titles and an ingest report from a dump
    Extract,
    /// Compute one report, or every report whose inputs are available
    Report {
        #[arg(value_enum)]
        which: ReportKind,
    },
    /// Download article text for the celebrity probe into the corpus directory
    FetchArticles {
        /// Required to make network requests
        #[arg(long)]
        enable_network: bool,
        /// Stop after this many articles
        #[arg(long)]
        limit: Option<usize>,
    },
}

/// Warnings raised during a run, echoed to stderr as they happen.
#[derive(Debug, Default)]
pub struct Warnings(Vec<String>);

impl Warnings {
    pub fn push(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.0.push(message);
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn run(cli: Cli) -> Result<Warnings, CliError> {
    let mut settings = cli.settings;
    if let Some(path) = &cli.config {
        settings = settings.overlay(Settings::from_file(path)?);
    }
    let cfg = PipelineConfig::resolve(settings)?;
    cfg.check_inputs(matches!(cli.command, Command::FetchArticles { .. }))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let mut warnings = Warnings::default();
    pool.install(|| match cli.command {
        Command::Extract => extract::extract(&cfg, &mut warnings),
        Command::Report { which } => report::report(&cfg, which, &mut warnings),
        Command::FetchArticles {
            enable_network,
            limit,
        } => fetch::fetch_articles(&cfg, enable_network, limit, &mut warnings),
    })?;
    Ok(warnings)
}

/// Parse `args`, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match run(cli) {
        Ok(w) => {
            if !w.is_empty() {
                eprintln!("{} warning(s)", w.len());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn property_config(cfg: &PipelineConfig) -> Result<PropertyConfig, CliError> {
    let mut props = match &cfg.paths.properties {
        Some(p) => PropertyConfig::load(p)?,
        None => PropertyConfig::default(),
    };
    for (k, v) in &cfg.property_overrides {
        props
            .set(k, v)
            .map_err(|m| CliError::Config(format!("property.{k}: {m}")))?;
    }
    Ok(props)
}

pub(crate) fn atlas(cfg: &PipelineConfig) -> Result<CultureAtlas, CliError> {
    Ok(match &cfg.paths.atlas {
        Some((e, l)) => wigi_core::load_atlas(e, l)?,
        None => CultureAtlas::bundled(),
    })
}

pub(crate) fn add_input(
    inputs: &mut std::collections::BTreeMap<String, output::InputEntry>,
    out: &output::OutDir,
    name: &str,
    path: &std::path::Path,
) -> Result<(), CliError> {
    inputs.insert(
        name.to_string(),
        output::InputEntry {
            path: out.display(path),
            sha256: output::sha256_file(path)?,
        },
    );
    Ok(())
}
