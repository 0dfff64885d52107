//! Celebrity detection from the opening of article text, and the regression on it.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use wigi_stats::{logistic_fit, LogitFit, LogitOptions};

use crate::error::{CelebrityError, LexiconError};
use crate::gender::{GenderClass, GenderGroup};
use crate::ids::EntityId;
use crate::indicators::{bucket_of, BucketWidth};
use crate::record::{HumanRecord, SitelinkTitle};

pub const DEFAULT_WINDOW: usize = 200;
pub const DEFAULT_BASELINE: &str = "dewiki";
pub const BUNDLED_LEXICON: &str = include_str!("../../../data/lexicon.txt");

fn starts_with_ci(b: &[u8], i: usize, pat: &[u8]) -> bool {
    b.len() >= i + pat.len() && b[i..i + pat.len()].eq_ignore_ascii_case(pat)
}

fn find_from(b: &[u8], from: usize, pat: &[u8]) -> Option<usize> {
    b.get(from..)?
        .windows(pat.len())
        .position(|w| w.eq_ignore_ascii_case(pat))
        .map(|p| p + from)
}

/// End (exclusive) of a balanced `open ... close` run starting at `i`.
fn balanced_end(b: &[u8], i: usize, open: &[u8], close: &[u8]) -> Option<usize> {
    let mut depth = 0usize;
    let mut j = i;
    while j < b.len() {
        if b[j..].starts_with(open) {
            depth += 1;
            j += open.len();
        } else if b[j..].starts_with(close) {
            depth -= 1;
            j += close.len();
            if depth == 0 {
                return Some(j);
            }
        } else {
            j += 1;
        }
    }
    None
}

/// Last top-level `|` segment of a link body.
fn link_label(inner: &str) -> &str {
    let b = inner.as_bytes();
    let (mut depth, mut start, mut j) = (0i32, 0usize, 0usize);
    while j < b.len() {
        if b[j..].starts_with(b"[[") || b[j..].starts_with(b"{{") {
            depth += 1;
            j += 2;
        } else if (b[j..].starts_with(b"]]") || b[j..].starts_with(b"}}")) && depth > 0 {
            depth -= 1;
            j += 2;
        } else {
            if b[j] == b'|' && depth == 0 {
                start = j + 1;
            }
            j += 1;
        }
    }
    &inner[start..]
}

fn is_ref_open(b: &[u8], i: usize) -> bool {
    starts_with_ci(b, i, b"<ref")
        && matches!(b.get(i + 4), Some(b'>' | b'/' | b' ' | b'\t' | b'\n'))
}

fn push_space(out: &mut String) {
    if !out.is_empty() && !out.ends_with(' ') {
        out.push(' ');
    }
}

fn strip_pass(s: &str) -> (String, bool) {
    let b = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut unbalanced = false;
    let mut i = 0;
    while i < b.len() {
        if b[i..].starts_with(b"<!--") {
            match find_from(b, i + 4, b"-->") {
                Some(end) => i = end + 3,
                None => {
                    unbalanced = true;
                    break;
                }
            }
        } else if b[i..].starts_with(b"{{") {
            match balanced_end(b, i, b"{{", b"}}") {
                Some(end) => i = end,
                None => {
                    unbalanced = true;
                    break;
                }
            }
        } else if is_ref_open(b, i) {
            let Some(gt) = find_from(b, i, b">") else {
                unbalanced = true;
                break;
            };
            if b[gt - 1] == b'/' {
                i = gt + 1;
            } else {
                match find_from(b, gt + 1, b"</ref").and_then(|c| find_from(b, c, b">")) {
                    Some(end) => i = end + 1,
                    None => {
                        unbalanced = true;
                        break;
                    }
                }
            }
        } else if b[i..].starts_with(b"[[") {
            match balanced_end(b, i, b"[[", b"]]") {
                Some(end) => {
                    let (label, inner_flag) = strip_pass(link_label(&s[i + 2..end - 2]));
                    unbalanced |= inner_flag;
                    if !label.is_empty() {
                        out.push_str(&label);
                    }
                    i = end;
                }
                None => {
                    unbalanced = true;
                    i += 2;
                }
            }
        } else if b[i..].starts_with(b"''") {
            while i < b.len() && b[i] == b'\'' {
                i += 1;
            }
        } else {
            let c = s[i..].chars().next().expect("in bounds");
            if c.is_whitespace() {
                push_space(&mut out);
            } else {
                out.push(c);
            }
            i += c.len_utf8();
        }
    }
    (out.trim().to_string(), unbalanced)
}

/// Reduce wikitext to plain prose. The flag reports unbalanced templates,
/// comments, refs or links (stripped to the end of input).
pub fn strip_wikitext(raw: &str) -> (String, bool) {
    let (mut cur, mut unbalanced) = strip_pass(raw);
    loop {
        let (next, flag) = strip_pass(&cur);
        unbalanced |= flag;
        if next == cur {
            return (cur, unbalanced);
        }
        cur = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CelebrityLexicon {
    /// Wiki code to terms, in file order.
    pub terms: Vec<(String, Vec<String>)>,
    /// Window length in Unicode scalar values.
    pub window: usize,
    pub preferred_wiki: String,
    pub case_fold: bool,
}

impl CelebrityLexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut terms: Vec<(String, Vec<String>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| LexiconError::Line {
                line: i + 1,
                message,
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let code = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("bad section header `{line}`")))?;
                if !code.ends_with("wiki") || code.len() <= 4 {
                    return Err(err(format!("`{code}` is not a wiki code")));
                }
                if terms.iter().any(|(w, _)| w == code) {
                    return Err(err(format!("section `{code}` repeated")));
                }
                terms.push((code.to_string(), Vec::new()));
            } else {
                let (_, list) = terms
                    .last_mut()
                    .ok_or_else(|| err("term outside a section".into()))?;
                list.push(line.to_string());
            }
        }
        if let Some((w, _)) = terms.iter().find(|(_, t)| t.is_empty()) {
            return Err(LexiconError::Line {
                line: 0,
                message: format!("section `{w}` has no terms"),
            });
        }
        Ok(Self {
            terms,
            window: DEFAULT_WINDOW,
            preferred_wiki: "enwiki".into(),
            case_fold: true,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon parses")
    }

    pub fn terms_for(&self, wiki: &str) -> Option<&[String]> {
        self.terms
            .iter()
            .find(|(w, _)| w == wiki)
            .map(|(_, t)| t.as_slice())
    }

    pub fn wikis(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(w, _)| w.as_str())
    }

    /// Preferred wiki if the record links it, else the first lexicon wiki it links.
    pub fn choose_wiki(&self, record: &HumanRecord) -> Option<&str> {
        if record.sitelinks.contains(&self.preferred_wiki)
            && self.terms_for(&self.preferred_wiki).is_some()
        {
            return Some(&self.preferred_wiki);
        }
        self.wikis().find(|w| record.sitelinks.contains(*w))
    }
}

/// Characters of `text` after folding, each paired with the index of the
/// character it came from.
fn fold_indexed(text: &str, fold: bool) -> (Vec<char>, Vec<usize>) {
    let mut chars = Vec::new();
    let mut origin = Vec::new();
    for (idx, c) in text.chars().enumerate() {
        if fold {
            for l in c.to_lowercase() {
                chars.push(l);
                origin.push(idx);
            }
        } else {
            chars.push(c);
            origin.push(idx);
        }
    }
    (chars, origin)
}

fn fold(term: &str, fold: bool) -> Vec<char> {
    fold_indexed(term, fold).0
}

/// Whether any term starts at a character index below `window`. Lowercasing is
/// the identity for unicameral scripts, so folding only affects scripts with case.
pub fn is_celebrity_with(text: &str, terms: &[String], window: usize, case_fold: bool) -> bool {
    let (hay, origin) = fold_indexed(text, case_fold);
    terms.iter().any(|term| {
        let needle = fold(term, case_fold);
        if needle.is_empty() || needle.len() > hay.len() {
            return false;
        }
        hay.windows(needle.len())
            .enumerate()
            .take_while(|(start, _)| origin[*start] < window)
            .any(|(_, w)| w == needle.as_slice())
    })
}

pub fn is_celebrity(text: &str, terms: &[String], window: usize) -> bool {
    is_celebrity_with(text, terms, window, true)
}

/// Source of raw article wikitext keyed by (wiki, title).
pub trait ArticleSource: Sync {
    fn article(&self, wiki: &str, title: &str) -> Option<String>;
}

/// File name for a title: spaces become underscores; `%`, `/` and `\` are percent-encoded.
pub fn title_file_name(title: &str) -> String {
    let mut out = String::with_capacity(title.len() + 4);
    for c in title.trim().chars() {
        match c {
            ' ' => out.push('_'),
            '%' => out.push_str("%25"),
            '/' => out.push_str("%2F"),
            '\\' => out.push_str("%5C"),
            c => out.push(c),
        }
    }
    out.push_str(".txt");
    out
}

pub fn corpus_path(root: &Path, wiki: &str, title: &str) -> PathBuf {
    root.join(wiki).join(title_file_name(title))
}

/// Directory corpus laid out as `<root>/<wiki>/<title>.txt`.
#[derive(Debug, Clone)]
pub struct DirCorpus {
    pub root: PathBuf,
}

impl ArticleSource for DirCorpus {
    fn article(&self, wiki: &str, title: &str) -> Option<String> {
        std::fs::read_to_string(corpus_path(&self.root, wiki, title)).ok()
    }
}

impl ArticleSource for HashMap<(String, String), String> {
    fn article(&self, wiki: &str, title: &str) -> Option<String> {
        self.get(&(wiki.to_string(), title.to_string())).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CelebrityObservation {
    pub qid: EntityId,
    pub wiki: String,
    pub gender: GenderClass,
    pub birth_decade: i64,
    pub is_celebrity: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationReport {
    /// Sorted by id.
    pub observations: Vec<CelebrityObservation>,
    pub missing_text: u64,
    pub unbalanced_markup: u64,
}

/// Observations for known-gender records born in `years` that link a lexicon wiki.
pub fn build_observations(
    records: &[HumanRecord],
    titles: &[SitelinkTitle],
    corpus: &dyn ArticleSource,
    lexicon: &CelebrityLexicon,
    years: RangeInclusive<i64>,
) -> ObservationReport {
    let title_of: HashMap<(EntityId, &str), &str> = titles
        .iter()
        .map(|t| ((t.id, t.wiki.as_str()), t.title.as_str()))
        .collect();
    let mut candidates: Vec<&HumanRecord> = records
        .iter()
        .filter(|r| r.gender.is_known())
        .filter(|r| r.birth_year().is_some_and(|y| years.contains(&y)))
        .collect();
    candidates.sort_by_key(|r| r.id);

    enum Outcome {
        Skip,
        Missing,
        Seen(CelebrityObservation, bool),
    }
    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|r| {
            let Some(wiki) = lexicon.choose_wiki(r) else {
                return Outcome::Skip;
            };
            let text = title_of
                .get(&(r.id, wiki))
                .and_then(|title| corpus.article(wiki, title));
            let Some(text) = text else {
                return Outcome::Missing;
            };
            let (plain, unbalanced) = strip_wikitext(&text);
            let terms = lexicon.terms_for(wiki).expect("chosen wiki has terms");
            let obs = CelebrityObservation {
                qid: r.id,
                wiki: wiki.to_string(),
                gender: r.gender,
                birth_decade: bucket_of(r.birth_year().expect("filtered"), BucketWidth::Decade),
                is_celebrity: is_celebrity_with(&plain, terms, lexicon.window, lexicon.case_fold),
            };
            Outcome::Seen(obs, unbalanced)
        })
        .collect();

    let mut report = ObservationReport::default();
    for o in outcomes {
        match o {
            Outcome::Skip => {}
            Outcome::Missing => report.missing_text += 1,
            Outcome::Seen(obs, unbalanced) => {
                report.unbalanced_markup += u64::from(unbalanced);
                report.observations.push(obs);
            }
        }
    }
    report
}

/// One article the probe would read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRequest {
    pub qid: EntityId,
    pub wiki: String,
    pub title: String,
}

/// Articles [`build_observations`] reads for these inputs, sorted by id. The
/// second value counts candidates whose chosen wiki has no title on record.
pub fn article_requests(
    records: &[HumanRecord],
    titles: &[SitelinkTitle],
    lexicon: &CelebrityLexicon,
    years: RangeInclusive<i64>,
) -> (Vec<ArticleRequest>, u64) {
    let title_of: HashMap<(EntityId, &str), &str> = titles
        .iter()
        .map(|t| ((t.id, t.wiki.as_str()), t.title.as_str()))
        .collect();
    let mut candidates: Vec<&HumanRecord> = records
        .iter()
        .filter(|r| r.gender.is_known())
        .filter(|r| r.birth_year().is_some_and(|y| years.contains(&y)))
        .collect();
    candidates.sort_by_key(|r| r.id);
    let mut untitled = 0;
    let mut out = Vec::new();
    for r in candidates {
        let Some(wiki) = lexicon.choose_wiki(r) else {
            continue;
        };
        match title_of.get(&(r.id, wiki)) {
            Some(title) => out.push(ArticleRequest {
                qid: r.id,
                wiki: wiki.to_string(),
                title: title.to_string(),
            }),
            None => untitled += 1,
        }
    }
    (out, untitled)
}

/// Logistic regression of celebrity status on wiki dummies, a female indicator
/// and birth decade. `baseline` is absorbed into the intercept; when it is
/// absent the alphabetically first wiki is used instead.
pub fn celebrity_regression(
    observations: &[CelebrityObservation],
    baseline: &str,
) -> Result<LogitFit, CelebrityError> {
    let mut wikis: Vec<&str> = observations.iter().map(|o| o.wiki.as_str()).collect();
    wikis.sort_unstable();
    wikis.dedup();
    if wikis.len() < 2 {
        return Err(CelebrityError::TooFewWikis { found: wikis.len() });
    }
    let female = |o: &CelebrityObservation| o.gender == GenderClass::Female;
    if observations.iter().all(female) || !observations.iter().any(female) {
        return Err(CelebrityError::SingleGender);
    }
    let base = if wikis.contains(&baseline) {
        baseline
    } else {
        wikis[0]
    };
    let dummies: Vec<&str> = wikis.into_iter().filter(|w| *w != base).collect();
    let features: Vec<Vec<f64>> = observations
        .iter()
        .map(|o| {
            let mut row: Vec<f64> = dummies
                .iter()
                .map(|w| f64::from(u8::from(o.wiki == *w)))
                .collect();
            row.push(f64::from(u8::from(female(o))));
            row.push(o.birth_decade as f64);
            row
        })
        .collect();
    let labels: Vec<bool> = observations.iter().map(|o| o.is_celebrity).collect();
    let mut names: Vec<String> = dummies.iter().map(|w| w.to_string()).collect();
    names.push("female".into());
    names.push("decade".into());
    Ok(logistic_fit(
        &features,
        &labels,
        Some(&names),
        LogitOptions::default(),
    )?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cell {
    pub total: u64,
    pub celebrities: u64,
}

impl Cell {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.celebrities as f64 / self.total as f64
        }
    }
}

/// Celebrity share by gender group, birth decade and wiki.
pub fn celebrity_matrix(
    observations: &[CelebrityObservation],
) -> BTreeMap<(GenderGroup, i64, String), Cell> {
    let mut out: BTreeMap<(GenderGroup, i64, String), Cell> = BTreeMap::new();
    for o in observations {
        let Some(group) = o.gender.group() else {
            continue;
        };
        let cell = out
            .entry((group, o.birth_decade, o.wiki.clone()))
            .or_default();
        cell.total += 1;
        cell.celebrities += u64::from(o.is_celebrity);
    }
    out
}
