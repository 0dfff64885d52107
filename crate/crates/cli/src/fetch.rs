//! `wigi fetch-articles`: fill the corpus directory with the articles the celebrity probe reads.

use std::collections::BTreeMap;

use serde_json::json;
use wigi_core::celebrity::article_requests;
use wigi_core::fetch::{ArticleFetcher, FetchConfig};
use wigi_core::FetchError;

use crate::output::{OutDir, Table};
use crate::report::{lexicon, load_records, load_titles};
use crate::settings::PipelineConfig;
use crate::{add_input, CliError, Warnings};

pub const FETCH_REPORT: &str = "fetch_report.csv";

pub fn fetch_articles(
    cfg: &PipelineConfig,
    enable_network: bool,
    limit: Option<usize>,
    warnings: &mut Warnings,
) -> Result<(), CliError> {
    if !cfg.offline && !enable_network {
        return Err(CliError::Usage(
            "fetch-articles makes network requests; pass --enable-network, or --offline to check the cache".into(),
        ));
    }
    let corpus = cfg.paths.corpus.clone().ok_or_else(|| {
        CliError::Usage("fetch-articles needs a corpus directory (--corpus)".into())
    })?;
    let records = load_records(cfg)?;
    let titles = load_titles(cfg)?.ok_or_else(|| CliError::MissingInput {
        what: "sitelinks".into(),
        path: cfg.paths.sitelinks.clone(),
    })?;
    let lexicon = lexicon(cfg)?;
    let mut out = OutDir::create(&cfg.out)?;

    let (mut requests, untitled) = article_requests(
        &records,
        &titles,
        &lexicon,
        cfg.celebrity_from..=cfg.celebrity_to,
    );
    if untitled > 0 {
        warnings.push(format!(
            "{untitled} candidate(s) have no title for their chosen wiki"
        ));
    }
    if let Some(n) = limit {
        requests.truncate(n);
    }
    let mut fc = FetchConfig::new(corpus, cfg.user_agent.clone().unwrap_or_default());
    fc.offline = cfg.offline;
    let fetcher = ArticleFetcher::new(fc)?;

    let mut table = Table::new(&["qid", "wiki", "title", "status"]);
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for req in &requests {
        let status = match fetcher.fetch_article(&req.wiki, &req.title) {
            Ok(_) => "ok",
            Err(FetchError::MissingPage { .. }) => "missing_page",
            Err(FetchError::Offline { .. }) => "not_cached",
            Err(e) => {
                warnings.push(e.to_string());
                "failed"
            }
        };
        *counts.entry(status).or_insert(0) += 1;
        table.row(vec![
            req.qid.to_string(),
            req.wiki.clone(),
            req.title.clone(),
            status.into(),
        ]);
    }
    out.table(FETCH_REPORT, &table)?;
    eprintln!("{} article(s): {counts:?}", requests.len());

    let mut inputs = BTreeMap::new();
    add_input(&mut inputs, &out, "records", &cfg.paths.records)?;
    add_input(&mut inputs, &out, "sitelinks", &cfg.paths.sitelinks)?;
    if let Some(p) = &cfg.paths.lexicon {
        add_input(&mut inputs, &out, "lexicon", p)?;
    }
    let settings = json!({
        "offline": cfg.offline,
        "celebrity_from": cfg.celebrity_from,
        "celebrity_to": cfg.celebrity_to,
        "limit": limit,
    });
    crate::output::update_manifest(
        &mut out,
        "fetch-articles",
        &settings,
        &inputs,
        warnings.as_slice(),
    )
}
