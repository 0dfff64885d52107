//! `wigi report <which>`: indicator tables computed from an extracted records file.

use std::collections::BTreeMap;

use clap::ValueEnum;
use wigi_core::celebrity::{
    build_observations, celebrity_matrix, celebrity_regression, CelebrityLexicon, DirCorpus,
};
use wigi_core::indicators::{
    article_size_stats, build_series, by_language, calibrate_start_decade, compare_with_index,
    coverage, culture_chi_squared, culture_tallies, national_scores, population_correlation,
    rank_differences, sitelink_culture_aggregate, uniqueness_deltas, Anchor, BucketWidth,
    GenderTally, RatioSeries,
};
use wigi_core::inputs::{read_external_index, read_population, read_sizes};
use wigi_core::{
    consensus_culture, read_records, read_titles, CultureAtlas, CultureCluster, GenderClass,
    GenderGroup, HumanRecord, SitelinkTitle,
};
use wigi_stats::{fit_exponential, solve_parity_year};

use crate::output::{num, opt_ratio, prob, ratio, InputEntry, OutDir, Table};
use crate::settings::PipelineConfig;
use crate::{add_input, atlas, CliError, Warnings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Tallies,
    Series,
    Wigi,
    Compare,
    Fit,
    Culture,
    Language,
    Uniqueness,
    Sizes,
    Celebrity,
    All,
}

impl ReportKind {
    pub const EACH: [ReportKind; 10] = [
        ReportKind::Tallies,
        ReportKind::Series,
        ReportKind::Wigi,
        ReportKind::Compare,
        ReportKind::Fit,
        ReportKind::Culture,
        ReportKind::Language,
        ReportKind::Uniqueness,
        ReportKind::Sizes,
        ReportKind::Celebrity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Tallies => "tallies",
            ReportKind::Series => "series",
            ReportKind::Wigi => "wigi",
            ReportKind::Compare => "compare",
            ReportKind::Fit => "fit",
            ReportKind::Culture => "culture",
            ReportKind::Language => "language",
            ReportKind::Uniqueness => "uniqueness",
            ReportKind::Sizes => "sizes",
            ReportKind::Celebrity => "celebrity",
            ReportKind::All => "all",
        }
    }
}

/// Why a report did not run.
enum Step {
    Missing(String),
    Fail(CliError),
}

impl From<CliError> for Step {
    fn from(e: CliError) -> Self {
        Step::Fail(e)
    }
}

pub(crate) fn load_records(cfg: &PipelineConfig) -> Result<Vec<HumanRecord>, CliError> {
    let path = &cfg.paths.records;
    if !path.exists() {
        return Err(CliError::MissingInput {
            what: "records (run `wigi extract` first)".into(),
            path: path.clone(),
        });
    }
    read_records(path).map_err(|source| CliError::Records {
        path: path.clone(),
        source,
    })
}

/// Sitelink titles, or `None` when the file does not exist.
pub(crate) fn load_titles(cfg: &PipelineConfig) -> Result<Option<Vec<SitelinkTitle>>, CliError> {
    let path = &cfg.paths.sitelinks;
    if !path.exists() {
        return Ok(None);
    }
    read_titles(path)
        .map(Some)
        .map_err(|source| CliError::Records {
            path: path.clone(),
            source,
        })
}

pub(crate) fn lexicon(cfg: &PipelineConfig) -> Result<CelebrityLexicon, CliError> {
    let mut lex = match &cfg.paths.lexicon {
        Some(p) => CelebrityLexicon::load(p)?,
        None => CelebrityLexicon::bundled(),
    };
    if let Some(w) = cfg.window {
        lex.window = w;
    }
    lex.case_fold = !cfg.case_sensitive;
    Ok(lex)
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    records: Vec<HumanRecord>,
    titles: Option<Option<Vec<SitelinkTitle>>>,
    atlas: CultureAtlas,
    out: OutDir,
    inputs: BTreeMap<String, InputEntry>,
    warnings: &'a mut Warnings,
}

impl Ctx<'_> {
    fn titles(&mut self) -> Result<Vec<SitelinkTitle>, Step> {
        if self.titles.is_none() {
            self.titles = Some(load_titles(self.cfg)?);
            if self.titles.as_ref().is_some_and(Option::is_some) {
                add_input(
                    &mut self.inputs,
                    &self.out,
                    "sitelinks",
                    &self.cfg.paths.sitelinks,
                )?;
            }
        }
        match self.titles.as_ref().and_then(Option::as_ref) {
            Some(t) => Ok(t.clone()),
            None => Err(Step::Missing(format!(
                "sitelink titles ({})",
                self.cfg.paths.sitelinks.display()
            ))),
        }
    }

    fn input(&mut self, name: &str, path: &std::path::Path) -> Result<(), CliError> {
        add_input(&mut self.inputs, &self.out, name, path)
    }
}

pub fn report(
    cfg: &PipelineConfig,
    which: ReportKind,
    warnings: &mut Warnings,
) -> Result<(), CliError> {
    let records = load_records(cfg)?;
    let out = OutDir::create(&cfg.out)?;
    let mut ctx = Ctx {
        cfg,
        records,
        titles: None,
        atlas: atlas(cfg)?,
        out,
        inputs: BTreeMap::new(),
        warnings,
    };
    ctx.input("records", &cfg.paths.records.clone())?;
    if let Some((e, l)) = &cfg.paths.atlas {
        ctx.input("atlas_entities", e)?;
        ctx.input("atlas_languages", l)?;
    }
    let kinds: Vec<ReportKind> = if which == ReportKind::All {
        ReportKind::EACH.to_vec()
    } else {
        vec![which]
    };
    for kind in kinds {
        let result = match kind {
            ReportKind::Tallies => tallies(&mut ctx),
            ReportKind::Series => series(&mut ctx),
            ReportKind::Wigi => wigi(&mut ctx),
            ReportKind::Compare => compare(&mut ctx),
            ReportKind::Fit => fit(&mut ctx),
            ReportKind::Culture => culture(&mut ctx),
            ReportKind::Language => language(&mut ctx),
            ReportKind::Uniqueness => uniqueness(&mut ctx),
            ReportKind::Sizes => sizes(&mut ctx),
            ReportKind::Celebrity => celebrity(&mut ctx),
            ReportKind::All => unreachable!("expanded above"),
        };
        match result {
            Ok(()) => {}
            Err(Step::Missing(what)) if which == ReportKind::All => {
                ctx.warnings
                    .push(format!("report `{}` skipped: needs {what}", kind.name()));
            }
            Err(Step::Missing(what)) => {
                return Err(CliError::ReportInput {
                    report: kind.name(),
                    what,
                })
            }
            Err(Step::Fail(e)) => return Err(e),
        }
    }
    let key = format!("report:{}", which.name());
    let Ctx {
        mut out,
        inputs,
        warnings,
        ..
    } = ctx;
    crate::output::update_manifest(&mut out, &key, cfg, &inputs, warnings.as_slice())
}

/// Canonical class order: the named classes, configured extras by id, unknown last.
fn class_rows(t: &GenderTally) -> Vec<(GenderClass, u64)> {
    let mut rows: Vec<(GenderClass, u64)> = GenderClass::NAMED
        .iter()
        .map(|&g| (g, t.count(g)))
        .collect();
    rows.extend(
        t.iter()
            .filter(|(g, _)| matches!(g, GenderClass::OtherNonbinary(_))),
    );
    rows.push((GenderClass::Unknown, t.count(GenderClass::Unknown)));
    rows
}

fn share(n: u64, d: u64) -> String {
    if d == 0 {
        String::new()
    } else {
        ratio(n as f64 / d as f64)
    }
}

fn tallies(ctx: &mut Ctx) -> Result<(), Step> {
    let t = GenderTally::from_records(&ctx.records);
    let mut classes = Table::new(&["gender", "count", "share_of_all", "share_of_known"]);
    for (g, n) in class_rows(&t) {
        let known = if g.is_known() {
            share(n, t.known_total())
        } else {
            String::new()
        };
        classes.row(vec![g.code(), n.to_string(), share(n, t.total()), known]);
    }
    ctx.out.table("gender_tallies.csv", &classes)?;

    let mut groups = Table::new(&["group", "count", "ratio"]);
    for g in [
        GenderGroup::Male,
        GenderGroup::Female,
        GenderGroup::Nonbinary,
    ] {
        groups.row(vec![
            g.to_string(),
            t.group_count(g).to_string(),
            opt_ratio(t.group_ratio(g).ok()),
        ]);
    }
    ctx.out.table("gender_groups.csv", &groups)?;

    let c = coverage(&ctx.records, &ctx.atlas);
    let mut cov = Table::new(&["property", "count", "share"]);
    for (name, n) in [
        ("gender", c.gender),
        ("birth", c.birth),
        ("death", c.death),
        ("place_of_birth", c.place_of_birth),
        ("citizenship", c.citizenship),
        ("ethnic_group", c.ethnic_group),
        ("country", c.country),
        ("culture", c.culture),
        ("sitelinks", c.sitelinks),
    ] {
        cov.row(vec![name.into(), n.to_string(), share(n, c.total)]);
    }
    cov.row(vec![
        "total".into(),
        c.total.to_string(),
        share(c.total, c.total),
    ]);
    ctx.out.table("coverage.csv", &cov)?;
    Ok(())
}

fn series_rows(table: &mut Table, s: &RatioSeries, anchor: &str, width: &str) {
    for (&bucket, t) in &s.points {
        table.row(vec![
            anchor.into(),
            width.into(),
            bucket.to_string(),
            t.total().to_string(),
            t.known_total().to_string(),
            t.group_count(GenderGroup::Male).to_string(),
            t.group_count(GenderGroup::Female).to_string(),
            t.group_count(GenderGroup::Nonbinary).to_string(),
            opt_ratio(t.female_ratio()),
            opt_ratio(t.nonbinary_ratio()),
            RatioSeries::is_provisional(bucket).to_string(),
        ]);
    }
}

fn series(ctx: &mut Ctx) -> Result<(), Step> {
    let mut table = Table::new(&[
        "anchor",
        "width",
        "bucket",
        "total",
        "known",
        "male",
        "female",
        "nonbinary",
        "female_ratio",
        "nonbinary_ratio",
        "provisional",
    ]);
    for (anchor, aname) in [(Anchor::BirthYear, "birth"), (Anchor::DeathYear, "death")] {
        for (width, wname) in [
            (BucketWidth::Decade, "decade"),
            (BucketWidth::Century, "century"),
            (BucketWidth::Millennium, "millennium"),
        ] {
            series_rows(
                &mut table,
                &build_series(&ctx.records, anchor, width, None),
                aname,
                wname,
            );
        }
    }
    ctx.out.table("series.csv", &table)?;

    let Some(path) = ctx.cfg.paths.population.clone() else {
        ctx.warnings
            .push("no population table configured; population comparison skipped");
        return Ok(());
    };
    ctx.input("population", &path)?;
    let pop = read_population(&path).map_err(CliError::from)?;
    let births = build_series(&ctx.records, Anchor::BirthYear, BucketWidth::Decade, None);
    let mut aligned = Table::new(&["bucket", "biographies", "population"]);
    let mut summary = Table::new(&["n", "pearson_r", "p_value"]);
    match population_correlation(&births, &pop) {
        Ok((rows, r)) => {
            for (b, n, p) in rows {
                aligned.row(vec![b.to_string(), n.to_string(), num(p)]);
            }
            summary.row(vec![r.n.to_string(), num(r.coefficient), prob(r.p_value)]);
        }
        Err(e) => ctx.warnings.push(format!("population comparison: {e}")),
    }
    ctx.out.table("population.csv", &aligned)?;
    ctx.out.table("population_correlation.csv", &summary)?;
    Ok(())
}

fn wigi(ctx: &mut Ctx) -> Result<(), Step> {
    let cfg = ctx.cfg;
    let scores = national_scores(
        &ctx.records,
        cfg.start_decade,
        cfg.min_count,
        cfg.score_by.into(),
    );
    let mut table = Table::new(&[
        "rank",
        "country_qid",
        "female_ratio",
        "known",
        "start_decade",
    ]);
    for (i, s) in scores.iter().enumerate() {
        table.row(vec![
            (i + 1).to_string(),
            s.country.to_string(),
            ratio(s.female_ratio),
            s.n.to_string(),
            s.start_decade.to_string(),
        ]);
    }
    if scores.is_empty() {
        ctx.warnings.push(format!(
            "wigi: no country has {} known-gender biographies from {}",
            cfg.min_count, cfg.start_decade
        ));
    }
    ctx.out.table("wigi_countries.csv", &table)?;
    Ok(())
}

fn compare(ctx: &mut Ctx) -> Result<(), Step> {
    let cfg = ctx.cfg;
    if cfg.paths.external.is_empty() {
        return Err(Step::Missing(
            "an external index (--external NAME=PATH)".into(),
        ));
    }
    let mut summary = Table::new(&["index", "decade", "rho", "p_value", "shared"]);
    for (name, path) in &cfg.paths.external {
        ctx.input(&format!("external:{name}"), path)?;
        let index = read_external_index(path).map_err(CliError::from)?;
        let key = cfg.score_by.into();
        let mut grid = Table::new(&["decade", "shared", "rho", "p_value", "selected"]);
        match calibrate_start_decade(&ctx.records, &index, &cfg.grid, cfg.min_count, key) {
            Ok(cal) => {
                for row in &cal.grid {
                    grid.row(vec![
                        row.decade.to_string(),
                        row.shared.to_string(),
                        row.rho.map(num).unwrap_or_default(),
                        row.p_value.map(prob).unwrap_or_default(),
                        (row.decade == cal.decade).to_string(),
                    ]);
                }
                let scores = national_scores(&ctx.records, cal.decade, cfg.min_count, key);
                let mut ranks =
                    Table::new(&["country_qid", "wigi_rank", "external_rank", "difference"]);
                for r in rank_differences(&scores, &index) {
                    ranks.row(vec![
                        r.country.to_string(),
                        r.wigi_rank.to_string(),
                        r.external_rank.to_string(),
                        r.difference.to_string(),
                    ]);
                }
                ctx.out
                    .table(&format!("compare_{name}_ranks.csv"), &ranks)?;
                summary.row(vec![
                    name.clone(),
                    cal.decade.to_string(),
                    num(cal.rho),
                    prob(cal.p_value),
                    cal.shared.to_string(),
                ]);
            }
            Err(e) => {
                ctx.warnings.push(format!("compare `{name}`: {e}"));
                for &decade in &cfg.grid {
                    let scores = national_scores(&ctx.records, decade, cfg.min_count, key);
                    let (shared, _) = compare_with_index(&scores, &index);
                    grid.row(vec![
                        decade.to_string(),
                        shared.to_string(),
                        String::new(),
                        String::new(),
                        "false".into(),
                    ]);
                }
            }
        }
        ctx.out.table(&format!("compare_{name}.csv"), &grid)?;
    }
    ctx.out.table("compare_summary.csv", &summary)?;
    Ok(())
}

fn fit(ctx: &mut Ctx) -> Result<(), Step> {
    let cfg = ctx.cfg;
    let births = build_series(&ctx.records, Anchor::BirthYear, BucketWidth::Decade, None);
    let points: Vec<(i64, f64)> = births
        .female_points(cfg.min_count)
        .into_iter()
        .filter(|(b, _)| {
            (cfg.fit_from..=cfg.fit_to).contains(b) && !RatioSeries::is_provisional(*b)
        })
        .collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|&(b, r)| (b as f64, r)).collect();
    let mut model = Table::new(&[
        "a",
        "b",
        "c",
        "d",
        "rss",
        "iterations",
        "converged",
        "degenerate",
        "in_unit_range",
        "points",
        "parity_target",
        "parity_year",
    ]);
    let mut curve = Table::new(&["decade", "observed", "predicted"]);
    match fit_exponential(&xy, None) {
        Ok(f) => {
            let parity = match solve_parity_year(&f.params, cfg.parity_target) {
                Ok(y) => num(y),
                Err(e) => {
                    ctx.warnings.push(format!("fit: parity year: {e}"));
                    String::new()
                }
            };
            if !f.converged {
                ctx.warnings.push("fit: exponential fit did not converge");
            }
            let p = f.params;
            model.row(vec![
                num(p.a),
                num(p.b),
                num(p.c),
                num(p.d),
                prob(f.rss),
                f.iterations.to_string(),
                f.converged.to_string(),
                f.degenerate.to_string(),
                f.in_unit_range.to_string(),
                xy.len().to_string(),
                ratio(cfg.parity_target),
                parity,
            ]);
            for &(b, r) in &points {
                curve.row(vec![b.to_string(), ratio(r), ratio(p.predict(b as f64))]);
            }
        }
        Err(e) => ctx.warnings.push(format!("fit: {e}")),
    }
    ctx.out.table("fit.csv", &model)?;
    ctx.out.table("fit_points.csv", &curve)?;
    Ok(())
}

fn tally_row(label: String, t: &GenderTally) -> Vec<String> {
    vec![
        label,
        t.total().to_string(),
        t.known_total().to_string(),
        t.group_count(GenderGroup::Male).to_string(),
        t.group_count(GenderGroup::Female).to_string(),
        t.group_count(GenderGroup::Nonbinary).to_string(),
        opt_ratio(t.female_ratio()),
    ]
}

const TALLY_HEADER: [&str; 7] = [
    "cluster",
    "total",
    "known",
    "male",
    "female",
    "nonbinary",
    "female_ratio",
];

fn culture(ctx: &mut Ctx) -> Result<(), Step> {
    let tallies = culture_tallies(&ctx.records, &ctx.atlas);
    let mut consensus = Table::new(&TALLY_HEADER);
    for c in CultureCluster::NINE
        .iter()
        .chain(&[CultureCluster::Unassigned])
    {
        consensus.row(tally_row(
            c.to_string(),
            &tallies.get(c).cloned().unwrap_or_default(),
        ));
    }
    ctx.out.table("culture_consensus.csv", &consensus)?;

    let mut outcomes: BTreeMap<&str, u64> = BTreeMap::new();
    for r in &ctx.records {
        *outcomes
            .entry(consensus_culture(r, &ctx.atlas).1.as_str())
            .or_insert(0) += 1;
    }
    let mut oc = Table::new(&["outcome", "count"]);
    for o in ["unanimous", "majority", "conflicted", "no_data"] {
        oc.row(vec![
            o.into(),
            outcomes.get(o).copied().unwrap_or(0).to_string(),
        ]);
    }
    ctx.out.table("culture_outcomes.csv", &oc)?;

    let agg = sitelink_culture_aggregate(&ctx.records, &ctx.atlas);
    let mut by_lang = Table::new(&TALLY_HEADER);
    for c in CultureCluster::NINE
        .iter()
        .chain(&[CultureCluster::Constructed])
    {
        by_lang.row(tally_row(
            c.to_string(),
            &agg.clusters.get(c).cloned().unwrap_or_default(),
        ));
    }
    by_lang.row(tally_row(
        CultureCluster::Unassigned.to_string(),
        &agg.unassigned,
    ));
    ctx.out.table("culture_sitelinks.csv", &by_lang)?;

    let mut chi = Table::new(&["statistic", "df", "p_value", "clusters", "groups"]);
    match culture_chi_squared(&tallies) {
        Ok(ind) => chi.row(vec![
            num(ind.result.statistic),
            ind.result.df.to_string(),
            prob(ind.result.p_value),
            ind.clusters
                .iter()
                .map(|c| c.as_str())
                .collect::<Vec<_>>()
                .join(";"),
            ind.groups
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ]),
        Err(e) => ctx.warnings.push(format!("culture independence test: {e}")),
    }
    ctx.out.table("culture_chi_squared.csv", &chi)?;
    Ok(())
}

fn language(ctx: &mut Ctx) -> Result<(), Step> {
    let rows = by_language(&ctx.records, ctx.cfg.top_n_languages);
    let mut table = Table::new(&[
        "rank",
        "wiki",
        "total",
        "known",
        "female_ratio",
        "nonbinary_ratio",
    ]);
    for (i, r) in rows.iter().enumerate() {
        table.row(vec![
            (i + 1).to_string(),
            r.wiki.clone(),
            r.total.to_string(),
            r.known.to_string(),
            opt_ratio(r.female_ratio),
            opt_ratio(r.nonbinary_ratio),
        ]);
    }
    ctx.out.table("languages.csv", &table)?;
    Ok(())
}

fn uniqueness(ctx: &mut Ctx) -> Result<(), Step> {
    let report = uniqueness_deltas(&ctx.records);
    let mut table = Table::new(&[
        "wiki",
        "unique_count",
        "many_count",
        "unique_female_ratio",
        "many_female_ratio",
        "delta",
    ]);
    for d in &report.deltas {
        table.row(vec![
            d.wiki.clone(),
            d.unique_count.to_string(),
            d.many_count.to_string(),
            ratio(d.unique_female_ratio),
            ratio(d.many_female_ratio),
            ratio(d.delta),
        ]);
    }
    ctx.out.table("uniqueness.csv", &table)?;
    if !report.omitted.is_empty() {
        ctx.warnings.push(format!(
            "uniqueness: {} wiki(s) omitted because a partition has no known-gender items",
            report.omitted.len()
        ));
    }
    Ok(())
}

fn sizes(ctx: &mut Ctx) -> Result<(), Step> {
    let Some(path) = ctx.cfg.paths.sizes.clone() else {
        return Err(Step::Missing("an article size table (--sizes)".into()));
    };
    let titles = ctx.titles()?;
    ctx.input("sizes", &path)?;
    let rows = read_sizes(&path).map_err(CliError::from)?;
    let report = article_size_stats(
        &ctx.records,
        &titles,
        &rows,
        ctx.cfg.top_n_sizes,
        ctx.cfg.min_count,
    );
    let mut table = Table::new(&[
        "wiki",
        "n_male",
        "n_female",
        "mean_bytes_male",
        "mean_bytes_female",
    ]);
    for s in &report.stats {
        table.row(vec![
            s.wiki.clone(),
            s.n_male.to_string(),
            s.n_female.to_string(),
            num(s.mean_bytes_male),
            num(s.mean_bytes_female),
        ]);
    }
    ctx.out.table("sizes.csv", &table)?;
    let mut fit = Table::new(&[
        "slope",
        "intercept",
        "r_squared",
        "n",
        "constant_response",
        "unjoined_rows",
    ]);
    match &report.fit {
        Ok(f) => fit.row(vec![
            num(f.slope),
            num(f.intercept),
            ratio(f.r_squared),
            f.n.to_string(),
            f.constant_response.to_string(),
            report.unjoined.to_string(),
        ]),
        Err(e) => ctx.warnings.push(format!("sizes regression: {e}")),
    }
    if report.unjoined > 0 {
        ctx.warnings.push(format!(
            "sizes: {} row(s) matched no biography",
            report.unjoined
        ));
    }
    ctx.out.table("sizes_fit.csv", &fit)?;
    Ok(())
}

fn celebrity(ctx: &mut Ctx) -> Result<(), Step> {
    let Some(corpus) = ctx.cfg.paths.corpus.clone() else {
        return Err(Step::Missing(
            "an article corpus directory (--corpus)".into(),
        ));
    };
    let titles = ctx.titles()?;
    let lex = lexicon(ctx.cfg)?;
    if let Some(p) = ctx.cfg.paths.lexicon.clone() {
        ctx.input("lexicon", &p)?;
    }
    let source = DirCorpus { root: corpus };
    let obs = build_observations(
        &ctx.records,
        &titles,
        &source,
        &lex,
        ctx.cfg.celebrity_from..=ctx.cfg.celebrity_to,
    );
    if obs.missing_text > 0 {
        ctx.warnings.push(format!(
            "celebrity: {} article(s) missing from the corpus",
            obs.missing_text
        ));
    }

    let mut matrix = Table::new(&[
        "gender",
        "decade",
        "wiki",
        "total",
        "celebrities",
        "percent",
    ]);
    for ((g, decade, wiki), cell) in celebrity_matrix(&obs.observations) {
        matrix.row(vec![
            g.to_string(),
            decade.to_string(),
            wiki,
            cell.total.to_string(),
            cell.celebrities.to_string(),
            format!("{:.2}", cell.percent()),
        ]);
    }
    ctx.out.table("celebrity_matrix.csv", &matrix)?;

    let mut coef = Table::new(&["term", "estimate", "std_error", "z", "p_value"]);
    let mut model = Table::new(&[
        "observations",
        "log_likelihood",
        "null_log_likelihood",
        "iterations",
        "converged",
        "separation",
        "missing_text",
        "unbalanced_markup",
    ]);
    if !obs.observations.iter().any(|o| o.wiki == ctx.cfg.baseline) {
        ctx.warnings.push(format!(
            "celebrity regression: baseline `{}` has no observations; using the alphabetically first wiki",
            ctx.cfg.baseline
        ));
    }
    match celebrity_regression(&obs.observations, &ctx.cfg.baseline) {
        Ok(fit) => {
            for c in &fit.coefficients {
                coef.row(vec![
                    c.name.clone(),
                    num(c.estimate),
                    num(c.std_error),
                    num(c.z),
                    prob(c.p_value),
                ]);
            }
            if fit.separation {
                ctx.warnings
                    .push("celebrity regression: separation detected, estimates are unreliable");
            }
            model.row(vec![
                fit.n.to_string(),
                num(fit.log_likelihood),
                num(fit.null_log_likelihood),
                fit.iterations.to_string(),
                fit.converged.to_string(),
                fit.separation.to_string(),
                obs.missing_text.to_string(),
                obs.unbalanced_markup.to_string(),
            ]);
        }
        Err(e) => ctx.warnings.push(format!("celebrity regression: {e}")),
    }
    ctx.out.table("celebrity_regression.csv", &coef)?;
    ctx.out.table("celebrity_model.csv", &model)?;
    Ok(())
}
