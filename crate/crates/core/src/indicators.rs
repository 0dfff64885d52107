//! Gender tallies and the indicators built from them.
//!
//! Every aggregate here is a sum of per-record contributions, so results do not
//! depend on record order or on how the work is chunked across threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use wigi_stats::{
    chi_squared, ols, pearson, spearman, ChiSquareResult, CorrelationResult, OlsFit, StatsError,
};

use crate::atlas::{consensus_culture, language_culture, CultureAtlas, CultureCluster};
use crate::error::IndicatorError;
use crate::gender::{GenderClass, GenderGroup};
use crate::ids::EntityId;
use crate::inputs::{ExternalIndex, PopulationRow, SizeRow};
use crate::record::{HumanRecord, SitelinkTitle};

/// Buckets starting at or after this year are reported as provisional.
pub const PROVISIONAL_FROM: i64 = 1990;
/// Countries an external index must share with the scores for a correlation.
pub const MIN_SHARED_COUNTRIES: usize = 5;
pub const MIN_POPULATION_BUCKETS: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenderTally {
    counts: BTreeMap<GenderClass, u64>,
}

impl GenderTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, gender: GenderClass) {
        self.add_n(gender, 1);
    }

    pub fn add_n(&mut self, gender: GenderClass, n: u64) {
        if n > 0 {
            *self.counts.entry(gender).or_default() += n;
        }
    }

    pub fn count(&self, gender: GenderClass) -> u64 {
        self.counts.get(&gender).copied().unwrap_or(0)
    }

    pub fn group_count(&self, group: GenderGroup) -> u64 {
        self.counts
            .iter()
            .filter(|(g, _)| g.group() == Some(group))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn known_total(&self) -> u64 {
        self.total() - self.count(GenderClass::Unknown)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn merge(&mut self, other: &GenderTally) {
        for (&g, &n) in &other.counts {
            self.add_n(g, n);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (GenderClass, u64)> + '_ {
        self.counts.iter().map(|(&g, &n)| (g, n))
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a HumanRecord>) -> Self {
        let mut t = Self::new();
        for r in records {
            t.add(r.gender);
        }
        t
    }

    pub fn group_ratio(&self, group: GenderGroup) -> Result<f64, IndicatorError> {
        gender_ratio_where(self, |g| g.group() == Some(group))
    }

    /// Female ratio, `None` when no gender is known.
    pub fn female_ratio(&self) -> Option<f64> {
        self.group_ratio(GenderGroup::Female).ok()
    }

    pub fn nonbinary_ratio(&self) -> Option<f64> {
        self.group_ratio(GenderGroup::Nonbinary).ok()
    }
}

/// Share of known-gender records whose class satisfies `pred`.
pub fn gender_ratio_where(
    tally: &GenderTally,
    pred: impl Fn(GenderClass) -> bool,
) -> Result<f64, IndicatorError> {
    let known = tally.known_total();
    if known == 0 {
        return Err(IndicatorError::UndefinedRatio);
    }
    let hits: u64 = tally
        .iter()
        .filter(|&(g, _)| g.is_known() && pred(g))
        .map(|(_, n)| n)
        .sum();
    Ok(hits as f64 / known as f64)
}

pub fn gender_ratio(tally: &GenderTally, class_set: &[GenderClass]) -> Result<f64, IndicatorError> {
    gender_ratio_where(tally, |g| class_set.contains(&g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BucketWidth {
    Decade,
    Century,
    Millennium,
}

impl BucketWidth {
    pub fn years(self) -> i64 {
        match self {
            BucketWidth::Decade => 10,
            BucketWidth::Century => 100,
            BucketWidth::Millennium => 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Anchor {
    BirthYear,
    DeathYear,
}

impl Anchor {
    pub fn year(self, record: &HumanRecord) -> Option<i64> {
        match self {
            Anchor::BirthYear => record.birth_year(),
            Anchor::DeathYear => record.death_year(),
        }
    }
}

/// Start of the bucket containing `year`, flooring toward negative infinity.
pub fn bucket_of(year: i64, width: BucketWidth) -> i64 {
    year.div_euclid(width.years()) * width.years()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioSeries {
    pub width: BucketWidth,
    pub anchor: Anchor,
    pub points: BTreeMap<i64, GenderTally>,
}

impl RatioSeries {
    pub fn new(anchor: Anchor, width: BucketWidth) -> Self {
        Self {
            width,
            anchor,
            points: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, record: &HumanRecord) {
        if let Some(y) = self.anchor.year(record) {
            self.points
                .entry(bucket_of(y, self.width))
                .or_default()
                .add(record.gender);
        }
    }

    pub fn merge(&mut self, other: &RatioSeries) {
        debug_assert_eq!((self.width, self.anchor), (other.width, other.anchor));
        for (&b, t) in &other.points {
            self.points.entry(b).or_default().merge(t);
        }
    }

    pub fn is_provisional(bucket: i64) -> bool {
        bucket >= PROVISIONAL_FROM
    }

    /// `(bucket, female ratio)` for buckets with at least `min_known` known genders.
    pub fn female_points(&self, min_known: u64) -> Vec<(i64, f64)> {
        self.points
            .iter()
            .filter(|(_, t)| t.known_total() >= min_known.max(1))
            .filter_map(|(&b, t)| t.female_ratio().map(|r| (b, r)))
            .collect()
    }
}

/// Tally every record whose anchor year has year precision and that passes `filter`.
pub fn build_series(
    records: &[HumanRecord],
    anchor: Anchor,
    width: BucketWidth,
    filter: Option<&(dyn Fn(&HumanRecord) -> bool + Sync)>,
) -> RatioSeries {
    records
        .par_iter()
        .filter(|r| filter.is_none_or(|f| f(r)))
        .fold(
            || RatioSeries::new(anchor, width),
            |mut s, r| {
                s.add(r);
                s
            },
        )
        .reduce(
            || RatioSeries::new(anchor, width),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

/// Whether a national score groups by derived country or by citizenship.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKey {
    #[default]
    Country,
    Citizenship,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NationalScore {
    pub country: EntityId,
    pub female_ratio: f64,
    pub n: u64,
    pub start_decade: i64,
}

fn national_tallies(
    records: &[HumanRecord],
    start_decade: i64,
    key: ScoreKey,
) -> BTreeMap<EntityId, GenderTally> {
    let mut out: BTreeMap<EntityId, GenderTally> = BTreeMap::new();
    for r in records {
        if !r.gender.is_known() {
            continue;
        }
        let Some(year) = r.birth_year() else { continue };
        if bucket_of(year, BucketWidth::Decade) < start_decade {
            continue;
        }
        match key {
            ScoreKey::Country => {
                if let Some(c) = r.country {
                    out.entry(c).or_default().add(r.gender);
                }
            }
            ScoreKey::Citizenship => {
                for &c in &r.citizenships {
                    out.entry(c).or_default().add(r.gender);
                }
            }
        }
    }
    out
}

/// Female ratio per country over known-gender records born in or after
/// `start_decade`, highest first, ties by country id.
pub fn national_scores(
    records: &[HumanRecord],
    start_decade: i64,
    min_count: u64,
    key: ScoreKey,
) -> Vec<NationalScore> {
    let mut scores: Vec<NationalScore> = national_tallies(records, start_decade, key)
        .into_iter()
        .filter(|(_, t)| t.known_total() >= min_count.max(1))
        .map(|(country, t)| NationalScore {
            country,
            female_ratio: t.group_ratio(GenderGroup::Female).expect("known_total > 0"),
            n: t.known_total(),
            start_decade,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.female_ratio
            .total_cmp(&a.female_ratio)
            .then(a.country.cmp(&b.country))
    });
    scores
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecadeCorrelation {
    pub decade: i64,
    pub shared: usize,
    /// `None` when fewer than the minimum countries are shared or a side is constant.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub decade: i64,
    pub rho: f64,
    pub p_value: f64,
    pub shared: usize,
    pub grid: Vec<DecadeCorrelation>,
}

/// Spearman correlation of national scores against an external index, joined on country.
pub fn compare_with_index(
    scores: &[NationalScore],
    external: &ExternalIndex,
) -> (usize, Option<CorrelationResult>) {
    let (wigi, ext): (Vec<f64>, Vec<f64>) = scores
        .iter()
        .filter_map(|s| external.get(&s.country).map(|&e| (s.female_ratio, e)))
        .unzip();
    let shared = wigi.len();
    if shared < MIN_SHARED_COUNTRIES {
        return (shared, None);
    }
    (shared, spearman(&wigi, &ext).ok())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDifference {
    pub country: EntityId,
    pub wigi_rank: usize,
    pub external_rank: usize,
    /// `external_rank - wigi_rank`; positive when the country ranks higher on WIGI.
    pub difference: i64,
}

/// Competition ranks (1 = highest value) of each value in `values`.
fn descending_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|w| *w > v).count())
        .collect()
}

/// Rank of each shared country on both scales, ordered by WIGI rank then country.
pub fn rank_differences(scores: &[NationalScore], external: &ExternalIndex) -> Vec<RankDifference> {
    let shared: Vec<(EntityId, f64, f64)> = scores
        .iter()
        .filter_map(|s| {
            external
                .get(&s.country)
                .map(|&e| (s.country, s.female_ratio, e))
        })
        .collect();
    let wigi = descending_ranks(&shared.iter().map(|t| t.1).collect::<Vec<_>>());
    let ext = descending_ranks(&shared.iter().map(|t| t.2).collect::<Vec<_>>());
    let mut out: Vec<RankDifference> = shared
        .iter()
        .zip(wigi.iter().zip(&ext))
        .map(|(t, (&w, &e))| RankDifference {
            country: t.0,
            wigi_rank: w,
            external_rank: e,
            difference: e as i64 - w as i64,
        })
        .collect();
    out.sort_by_key(|r| (r.wigi_rank, r.country));
    out
}

/// Default calibration grid: decades 1800 through 1990.
pub fn default_grid() -> Vec<i64> {
    (1800..=1990).step_by(10).collect()
}

/// Pick the grid decade whose national scores best rank-correlate with `external`.
/// Ties go to the earliest decade.
pub fn calibrate_start_decade(
    records: &[HumanRecord],
    external: &ExternalIndex,
    grid: &[i64],
    min_count: u64,
    key: ScoreKey,
) -> Result<Calibration, IndicatorError> {
    let mut decades: Vec<i64> = grid.to_vec();
    decades.sort_unstable();
    decades.dedup();
    let rows: Vec<DecadeCorrelation> = decades
        .par_iter()
        .map(|&decade| {
            let scores = national_scores(records, decade, min_count, key);
            let (shared, corr) = compare_with_index(&scores, external);
            DecadeCorrelation {
                decade,
                shared,
                rho: corr.as_ref().map(|c| c.coefficient),
                p_value: corr.as_ref().map(|c| c.p_value),
            }
        })
        .collect();
    let mut best: Option<&DecadeCorrelation> = None;
    for row in &rows {
        if let Some(rho) = row.rho {
            if best.is_none_or(|b| rho > b.rho.expect("best has rho")) {
                best = Some(row);
            }
        }
    }
    match best {
        Some(b) => Ok(Calibration {
            decade: b.decade,
            rho: b.rho.expect("best has rho"),
            p_value: b.p_value.expect("best has p"),
            shared: b.shared,
            grid: rows.clone(),
        }),
        None => Err(IndicatorError::TooFewShared {
            shared: rows.iter().map(|r| r.shared).max().unwrap_or(0),
            needed: MIN_SHARED_COUNTRIES,
        }),
    }
}

/// Population averaged within each bucket of the series width.
pub fn population_buckets(population: &[PopulationRow], width: BucketWidth) -> BTreeMap<i64, f64> {
    let mut sums: BTreeMap<i64, (f64, u32)> = BTreeMap::new();
    for row in population {
        let e = sums.entry(bucket_of(row.year, width)).or_default();
        e.0 += row.population;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(b, (s, n))| (b, s / f64::from(n)))
        .collect()
}

/// Bucket start, biography total and mean population.
pub type PopulationPoint = (i64, u64, f64);

/// Pearson correlation of biography totals with population, bucket by bucket.
pub fn population_correlation(
    series: &RatioSeries,
    population: &[PopulationRow],
) -> Result<(Vec<PopulationPoint>, CorrelationResult), IndicatorError> {
    let pop = population_buckets(population, series.width);
    let aligned: Vec<PopulationPoint> = series
        .points
        .iter()
        .filter_map(|(b, t)| pop.get(b).map(|&p| (*b, t.total(), p)))
        .collect();
    if aligned.len() < MIN_POPULATION_BUCKETS {
        return Err(IndicatorError::TooFewBuckets {
            overlap: aligned.len(),
            needed: MIN_POPULATION_BUCKETS,
        });
    }
    let bios: Vec<f64> = aligned.iter().map(|a| a.1 as f64).collect();
    let pops: Vec<f64> = aligned.iter().map(|a| a.2).collect();
    let r = pearson(&bios, &pops)?;
    Ok((aligned, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageRow {
    pub wiki: String,
    pub total: u64,
    pub known: u64,
    pub female_ratio: Option<f64>,
    pub nonbinary_ratio: Option<f64>,
}

fn tallies_by_wiki(records: &[HumanRecord]) -> BTreeMap<String, GenderTally> {
    let mut out: BTreeMap<String, GenderTally> = BTreeMap::new();
    for r in records {
        for w in &r.sitelinks {
            out.entry(w.clone()).or_default().add(r.gender);
        }
    }
    out
}

/// Wikis ranked by biography count, largest first, ties by code.
pub fn rank_wikis(records: &[HumanRecord]) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for r in records {
        for w in &r.sitelinks {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(w, n)| (w.to_string(), n))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Per-wiki composition for the `top_n` wikis with most biographies. A record
/// counts once toward every wiki it has a sitelink to.
pub fn by_language(records: &[HumanRecord], top_n: usize) -> Vec<LanguageRow> {
    let tallies = tallies_by_wiki(records);
    let mut rows: Vec<LanguageRow> = tallies
        .into_iter()
        .map(|(wiki, t)| LanguageRow {
            wiki,
            total: t.total(),
            known: t.known_total(),
            female_ratio: t.female_ratio(),
            nonbinary_ratio: t.nonbinary_ratio(),
        })
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.wiki.cmp(&b.wiki)));
    rows.truncate(top_n);
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessDelta {
    pub wiki: String,
    pub unique_female_ratio: f64,
    pub many_female_ratio: f64,
    pub delta: f64,
    pub unique_count: u64,
    pub many_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UniquenessReport {
    pub deltas: Vec<UniquenessDelta>,
    /// Wikis left out because one partition has no known-gender items.
    pub omitted: Vec<(String, &'static str)>,
}

/// Language-unique (one sitelink) versus language-many (two or more) female ratios per wiki.
pub fn uniqueness_deltas(records: &[HumanRecord]) -> UniquenessReport {
    let mut parts: BTreeMap<&str, (GenderTally, GenderTally)> = BTreeMap::new();
    for r in records {
        let unique = r.sitelinks.len() == 1;
        for w in &r.sitelinks {
            let e = parts.entry(w.as_str()).or_default();
            if unique { &mut e.0 } else { &mut e.1 }.add(r.gender);
        }
    }
    let mut report = UniquenessReport::default();
    for (wiki, (unique, many)) in parts {
        match (unique.female_ratio(), many.female_ratio()) {
            (Some(u), Some(m)) => report.deltas.push(UniquenessDelta {
                wiki: wiki.to_string(),
                unique_female_ratio: u,
                many_female_ratio: m,
                delta: u - m,
                unique_count: unique.total(),
                many_count: many.total(),
            }),
            (None, _) => {
                log::warn!("{wiki}: no known-gender language-unique items, omitted");
                report
                    .omitted
                    .push((wiki.to_string(), "unique partition undefined"));
            }
            (_, None) => {
                log::warn!("{wiki}: no known-gender language-many items, omitted");
                report
                    .omitted
                    .push((wiki.to_string(), "many partition undefined"));
            }
        }
    }
    report
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CultureAggregate {
    pub clusters: BTreeMap<CultureCluster, GenderTally>,
    /// Items with no sitelink in a mapped language.
    pub unassigned: GenderTally,
}

/// Each item counts once toward every cluster with at least one of its sitelink languages.
pub fn sitelink_culture_aggregate(
    records: &[HumanRecord],
    atlas: &CultureAtlas,
) -> CultureAggregate {
    let mut agg = CultureAggregate::default();
    for r in records {
        let clusters: BTreeSet<CultureCluster> = r
            .sitelinks
            .iter()
            .map(|w| language_culture(w, atlas))
            .filter(|&c| c != CultureCluster::Unassigned)
            .collect();
        if clusters.is_empty() {
            agg.unassigned.add(r.gender);
        }
        for c in clusters {
            agg.clusters.entry(c).or_default().add(r.gender);
        }
    }
    agg
}

/// Gender tallies per consensus culture; `Unassigned` holds records without one.
pub fn culture_tallies(
    records: &[HumanRecord],
    atlas: &CultureAtlas,
) -> BTreeMap<CultureCluster, GenderTally> {
    let mut out: BTreeMap<CultureCluster, GenderTally> = BTreeMap::new();
    for r in records {
        out.entry(consensus_culture(r, atlas).0)
            .or_default()
            .add(r.gender);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CultureIndependence {
    pub clusters: Vec<CultureCluster>,
    pub groups: Vec<GenderGroup>,
    pub table: Vec<Vec<u64>>,
    pub result: ChiSquareResult,
}

/// Chi-squared test of gender group against consensus culture. Unassigned
/// records are excluded, as are all-zero rows and columns.
pub fn culture_chi_squared(
    tallies: &BTreeMap<CultureCluster, GenderTally>,
) -> Result<CultureIndependence, IndicatorError> {
    const GROUPS: [GenderGroup; 3] = [
        GenderGroup::Male,
        GenderGroup::Female,
        GenderGroup::Nonbinary,
    ];
    let full: Vec<(CultureCluster, [u64; 3])> = tallies
        .iter()
        .filter(|(c, _)| **c != CultureCluster::Unassigned)
        .map(|(&c, t)| (c, GROUPS.map(|g| t.group_count(g))))
        .filter(|(_, row)| row.iter().any(|&n| n > 0))
        .collect();
    let keep: Vec<usize> = (0..GROUPS.len())
        .filter(|&j| full.iter().any(|(_, row)| row[j] > 0))
        .collect();
    let table: Vec<Vec<u64>> = full
        .iter()
        .map(|(_, row)| keep.iter().map(|&j| row[j]).collect())
        .collect();
    let result = chi_squared(&table)?;
    Ok(CultureIndependence {
        clusters: full.iter().map(|(c, _)| *c).collect(),
        groups: keep.iter().map(|&j| GROUPS[j]).collect(),
        table,
        result,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeStats {
    pub wiki: String,
    pub mean_bytes_male: f64,
    pub mean_bytes_female: f64,
    pub n_male: u64,
    pub n_female: u64,
}

#[derive(Debug)]
pub struct SizeReport {
    pub stats: Vec<SizeStats>,
    /// Size rows whose (wiki, title) matched no biography.
    pub unjoined: u64,
    /// OLS of female mean on male mean across the reported wikis.
    pub fit: Result<OlsFit, StatsError>,
}

/// Titles compare with underscores read as spaces.
pub fn normalize_title(title: &str) -> String {
    title.trim().replace('_', " ")
}

/// Mean article size by binary gender for the `top_n` wikis by biography count.
pub fn article_size_stats(
    records: &[HumanRecord],
    titles: &[SitelinkTitle],
    sizes: &[SizeRow],
    top_n: usize,
    min_count: u64,
) -> SizeReport {
    let genders: HashMap<EntityId, GenderClass> =
        records.iter().map(|r| (r.id, r.gender)).collect();
    let by_title: HashMap<(&str, String), EntityId> = titles
        .iter()
        .map(|t| ((t.wiki.as_str(), normalize_title(&t.title)), t.id))
        .collect();
    let top: BTreeSet<String> = rank_wikis(records)
        .into_iter()
        .take(top_n)
        .map(|(w, _)| w)
        .collect();

    let mut sums: BTreeMap<&str, [(f64, u64); 2]> = BTreeMap::new();
    let mut unjoined = 0;
    for row in sizes {
        let Some(gender) = by_title
            .get(&(row.wiki.as_str(), normalize_title(&row.title)))
            .and_then(|id| genders.get(id))
        else {
            unjoined += 1;
            continue;
        };
        if !top.contains(&row.wiki) {
            continue;
        }
        let slot = match gender {
            GenderClass::Male => 0,
            GenderClass::Female => 1,
            _ => continue,
        };
        let e = &mut sums.entry(row.wiki.as_str()).or_default()[slot];
        e.0 += row.bytes as f64;
        e.1 += 1;
    }
    let min = min_count.max(1);
    let stats: Vec<SizeStats> = sums
        .into_iter()
        .filter(|(_, [m, f])| m.1 >= min && f.1 >= min)
        .map(|(wiki, [m, f])| SizeStats {
            wiki: wiki.to_string(),
            mean_bytes_male: m.0 / m.1 as f64,
            mean_bytes_female: f.0 / f.1 as f64,
            n_male: m.1,
            n_female: f.1,
        })
        .collect();
    let x: Vec<f64> = stats.iter().map(|s| s.mean_bytes_male).collect();
    let y: Vec<f64> = stats.iter().map(|s| s.mean_bytes_female).collect();
    SizeReport {
        fit: ols(&x, &y),
        stats,
        unjoined,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub total: u64,
    pub gender: u64,
    pub birth: u64,
    pub death: u64,
    pub place_of_birth: u64,
    pub citizenship: u64,
    pub ethnic_group: u64,
    pub country: u64,
    pub culture: u64,
    pub sitelinks: u64,
}

/// How many records carry each property.
pub fn coverage(records: &[HumanRecord], atlas: &CultureAtlas) -> Coverage {
    let mut c = Coverage::default();
    for r in records {
        c.total += 1;
        c.gender += u64::from(r.gender.is_known());
        c.birth += u64::from(r.birth.is_some());
        c.death += u64::from(r.death.is_some());
        c.place_of_birth += u64::from(r.place_of_birth.is_some());
        c.citizenship += u64::from(!r.citizenships.is_empty());
        c.ethnic_group += u64::from(!r.ethnic_groups.is_empty());
        c.country += u64::from(r.country.is_some());
        c.culture += u64::from(consensus_culture(r, atlas).0 != CultureCluster::Unassigned);
        c.sitelinks += u64::from(!r.sitelinks.is_empty());
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: u64) -> EntityId {
        EntityId::new(n).unwrap()
    }

    #[test]
    fn rank_differences_signed_external_minus_wigi() {
        let score = |c, r| NationalScore {
            country: q(c),
            female_ratio: r,
            n: 20,
            start_decade: 1900,
        };
        let scores = vec![
            score(1, 0.4),
            score(2, 0.3),
            score(3, 0.3),
            score(4, 0.1),
            score(5, 0.2),
        ];
        let ext: ExternalIndex = [(q(1), 0.5), (q(2), 0.9), (q(3), 0.7), (q(5), 0.6)]
            .into_iter()
            .collect();
        let got: Vec<(u64, usize, usize, i64)> = rank_differences(&scores, &ext)
            .iter()
            .map(|r| {
                (
                    r.country.number(),
                    r.wigi_rank,
                    r.external_rank,
                    r.difference,
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![(1, 1, 4, 3), (2, 2, 1, -1), (3, 2, 2, 0), (5, 4, 3, -1)]
        );
    }

    fn person(id: u64, gender: GenderClass, birth: Option<i64>) -> HumanRecord {
        let mut r = HumanRecord::new(q(id));
        r.gender = gender;
        r.birth =
            birth.map(|y| crate::record::YearValue::new(y, crate::record::DatePrecision::Year));
        r
    }

    fn tally(pairs: &[(GenderClass, u64)]) -> GenderTally {
        let mut t = GenderTally::new();
        for &(g, n) in pairs {
            t.add_n(g, n);
        }
        t
    }

    #[test]
    fn ratio_examples() {
        let t = tally(&[(GenderClass::Male, 844), (GenderClass::Female, 156)]);
        assert_eq!(gender_ratio(&t, &[GenderClass::Female]).unwrap(), 0.156);
        assert_eq!(
            gender_ratio(&tally(&[(GenderClass::Female, 5)]), &[GenderClass::Female]).unwrap(),
            1.0
        );
        assert!(matches!(
            gender_ratio(&tally(&[(GenderClass::Unknown, 9)]), &[GenderClass::Female]),
            Err(IndicatorError::UndefinedRatio)
        ));
    }

    #[test]
    fn buckets_floor() {
        assert_eq!(bucket_of(1887, BucketWidth::Decade), 1880);
        assert_eq!(bucket_of(-44, BucketWidth::Decade), -50);
        assert_eq!(bucket_of(2000, BucketWidth::Century), 2000);
        assert_eq!(bucket_of(-1, BucketWidth::Millennium), -1000);
    }

    #[test]
    fn series_example() {
        let mut records: Vec<HumanRecord> = (0..3)
            .map(|i| person(i + 1, GenderClass::Female, Some(1905)))
            .collect();
        records.extend((0..7).map(|i| person(i + 10, GenderClass::Male, Some(1905))));
        let coarse = {
            let mut r = person(99, GenderClass::Female, None);
            r.birth = Some(crate::record::YearValue::new(
                1900,
                crate::record::DatePrecision::Century,
            ));
            r
        };
        records.push(coarse);
        let s = build_series(&records, Anchor::BirthYear, BucketWidth::Decade, None);
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[&1900].female_ratio(), Some(0.3));
        let only_f = build_series(
            &records,
            Anchor::BirthYear,
            BucketWidth::Decade,
            Some(&|r: &HumanRecord| r.gender == GenderClass::Female),
        );
        assert_eq!(only_f.points[&1900].total(), 3);
    }

    #[test]
    fn national_score_threshold_and_order() {
        let mut records = Vec::new();
        let mut id = 1;
        let mut add = |country: u64, g: GenderClass, n: usize, year: i64| {
            for _ in 0..n {
                let mut r = person(id, g, Some(year));
                r.country = Some(q(country));
                records.push(r);
                id += 1;
            }
        };
        add(10, GenderClass::Female, 3, 1950);
        add(10, GenderClass::Male, 7, 1950);
        add(10, GenderClass::Female, 5, 1850);
        add(20, GenderClass::Female, 2, 1950);
        add(20, GenderClass::Male, 2, 1950);
        add(30, GenderClass::Female, 5, 1950);
        add(30, GenderClass::Male, 5, 1950);
        let s = national_scores(&records, 1900, 10, ScoreKey::Country);
        assert_eq!(
            s.iter()
                .map(|s| (s.country, s.female_ratio))
                .collect::<Vec<_>>(),
            vec![(q(30), 0.5), (q(10), 0.3)]
        );
        assert_eq!(s[1].n, 10);
    }

    #[test]
    fn uniqueness_example_and_omission() {
        let mut records = Vec::new();
        let mut id = 0;
        let mut add = |g: GenderClass, links: &[&str]| {
            id += 1;
            let mut r = person(id, g, None);
            r.sitelinks = links.iter().map(|s| s.to_string()).collect();
            records.push(r);
        };
        for g in [
            GenderClass::Female,
            GenderClass::Female,
            GenderClass::Male,
            GenderClass::Male,
        ] {
            add(g, &["tlwiki"]);
        }
        add(GenderClass::Female, &["tlwiki", "enwiki"]);
        for _ in 0..3 {
            add(GenderClass::Male, &["tlwiki", "enwiki"]);
        }
        add(GenderClass::Male, &["dewiki"]);
        let rep = uniqueness_deltas(&records);
        let tl = rep.deltas.iter().find(|d| d.wiki == "tlwiki").unwrap();
        assert_eq!(
            (tl.unique_female_ratio, tl.many_female_ratio, tl.delta),
            (0.5, 0.25, 0.25)
        );
        assert_eq!(tl.unique_count + tl.many_count, 8);
        assert!(rep.omitted.iter().any(|(w, _)| w == "dewiki"));
        assert!(rep.omitted.iter().any(|(w, _)| w == "enwiki"));
    }

    #[test]
    fn language_counts_and_culture_aggregate() {
        let mut a = person(1, GenderClass::Female, None);
        a.sitelinks = ["enwiki", "zhwiki", "jawiki"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut b = person(2, GenderClass::Male, None);
        b.sitelinks = ["enwiki", "xxwiki"].iter().map(|s| s.to_string()).collect();
        let mut c = person(3, GenderClass::Male, None);
        c.sitelinks = ["xxwiki".to_string()].into();
        let records = vec![a, b, c];
        let rows = by_language(&records, 1);
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].wiki.as_str(), rows[0].total), ("enwiki", 2));
        let agg = sitelink_culture_aggregate(&records, &CultureAtlas::bundled());
        assert_eq!(agg.clusters[&CultureCluster::Confucian].total(), 1);
        assert_eq!(agg.clusters[&CultureCluster::EnglishSpeaking].total(), 2);
        assert_eq!(agg.unassigned.total(), 1);
    }

    #[test]
    fn size_stats_exact_line() {
        let mut records = Vec::new();
        let mut titles = Vec::new();
        let mut sizes = Vec::new();
        let mut id = 0;
        for (wiki, male) in [("enwiki", 1000.0), ("dewiki", 3000.0)] {
            for (g, bytes) in [(GenderClass::Male, male), (GenderClass::Female, 0.9 * male)] {
                id += 1;
                let mut r = person(id, g, None);
                r.sitelinks = [wiki.to_string()].into();
                records.push(r);
                titles.push(SitelinkTitle {
                    id: q(id),
                    wiki: wiki.into(),
                    title: format!("Person {id}"),
                });
                sizes.push(SizeRow {
                    wiki: wiki.into(),
                    title: format!("Person_{id}"),
                    bytes: bytes as u64,
                });
            }
        }
        sizes.push(SizeRow {
            wiki: "enwiki".into(),
            title: "Nobody".into(),
            bytes: 1,
        });
        let rep = article_size_stats(&records, &titles, &sizes, 25, 1);
        assert_eq!(rep.unjoined, 1);
        let fit = rep.fit.unwrap();
        assert!((fit.slope - 0.9).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
        let one = article_size_stats(&records, &titles, &sizes, 1, 1);
        assert!(one.fit.is_err());
    }

    #[test]
    fn chi_squared_drops_empty_columns() {
        let mut t = BTreeMap::new();
        t.insert(
            CultureCluster::Islamic,
            tally(&[(GenderClass::Male, 20), (GenderClass::Female, 10)]),
        );
        t.insert(
            CultureCluster::Confucian,
            tally(&[(GenderClass::Male, 10), (GenderClass::Female, 20)]),
        );
        t.insert(
            CultureCluster::Unassigned,
            tally(&[(GenderClass::Kathoey, 4)]),
        );
        let r = culture_chi_squared(&t).unwrap();
        assert_eq!(r.groups, vec![GenderGroup::Male, GenderGroup::Female]);
        assert!((r.result.statistic - 20.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn population_alignment() {
        let records: Vec<HumanRecord> = [1800, 1801, 1810, 1810, 1810, 1820, 1820]
            .iter()
            .enumerate()
            .map(|(i, &y)| person(i as u64 + 1, GenderClass::Male, Some(y)))
            .collect();
        let series = build_series(&records, Anchor::BirthYear, BucketWidth::Decade, None);
        let proportional = [(1800, 200.0), (1805, 200.0), (1810, 300.0), (1820, 200.0)]
            .map(|(year, population)| PopulationRow { year, population });
        let (aligned, r) = population_correlation(&series, &proportional).unwrap();
        assert_eq!(aligned.len(), 3);
        assert!((r.coefficient - 1.0).abs() < 1e-12);
        assert!(matches!(
            population_correlation(&series, &proportional[..2]),
            Err(IndicatorError::TooFewBuckets { overlap: 1, .. })
        ));
    }

    fn arb_records() -> impl Strategy<Value = Vec<HumanRecord>> {
        let gender = prop_oneof![
            Just(GenderClass::Male),
            Just(GenderClass::Female),
            Just(GenderClass::Kathoey),
            Just(GenderClass::Unknown)
        ];
        proptest::collection::vec(
            (gender, proptest::option::of(1700i64..2020), 0u8..8, 1u64..6),
            0..120,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (g, y, links, country))| {
                    let mut r = person(i as u64 + 1, g, y);
                    r.country = Some(q(country));
                    r.sitelinks = ["enwiki", "dewiki", "tlwiki"]
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| links & (1 << k) != 0)
                        .map(|(_, w)| w.to_string())
                        .collect();
                    r
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn aggregates_ignore_order_and_chunking(records in arb_records(), split in 0usize..120, seed in any::<u64>()) {
            let whole = build_series(&records, Anchor::BirthYear, BucketWidth::Decade, None);
            let mut shuffled = records.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left(seed as usize % n);
            }
            prop_assert_eq!(&whole, &build_series(&shuffled, Anchor::BirthYear, BucketWidth::Decade, None));
            let k = split.min(n);
            let mut merged = build_series(&records[..k], Anchor::BirthYear, BucketWidth::Decade, None);
            merged.merge(&build_series(&records[k..], Anchor::BirthYear, BucketWidth::Decade, None));
            prop_assert_eq!(&whole, &merged);
            prop_assert_eq!(by_language(&records, 50), by_language(&shuffled, 50));
            prop_assert_eq!(uniqueness_deltas(&records), uniqueness_deltas(&shuffled));
        }

        #[test]
        fn group_ratios_sum_to_one(records in arb_records()) {
            let s = build_series(&records, Anchor::BirthYear, BucketWidth::Decade, None);
            for t in s.points.values() {
                if t.known_total() > 0 {
                    let sum = t.group_ratio(GenderGroup::Female).unwrap()
                        + t.group_ratio(GenderGroup::Male).unwrap()
                        + t.group_ratio(GenderGroup::Nonbinary).unwrap();
                    prop_assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn later_start_uses_subset(records in arb_records(), d0 in 170i64..200, step in 1i64..10) {
            let (d0, d1) = (d0 * 10, (d0 + step) * 10);
            let n = |d| national_scores(&records, d, 1, ScoreKey::Country).iter().map(|s| s.n).sum::<u64>();
            prop_assert!(n(d1) <= n(d0));
        }

        #[test]
        fn tally_merge_commutes_and_associates(a in arb_records(), b in arb_records(), c in arb_records()) {
            let (ta, tb, tc) = (GenderTally::from_records(&a), GenderTally::from_records(&b), GenderTally::from_records(&c));
            let mut ab = ta.clone();
            ab.merge(&tb);
            let mut ba = tb.clone();
            ba.merge(&ta);
            prop_assert_eq!(&ab, &ba);
            let mut ab_c = ab.clone();
            ab_c.merge(&tc);
            let mut bc = tb.clone();
            bc.merge(&tc);
            let mut a_bc = ta.clone();
            a_bc.merge(&bc);
            prop_assert_eq!(ab_c, a_bc);
        }
    }
}
