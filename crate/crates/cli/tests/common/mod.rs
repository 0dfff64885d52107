//! Deterministic synthetic inputs shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigi_core::celebrity::{corpus_path, CelebrityLexicon};

/// Countries present in the bundled atlas, with the female propensity used to generate them.
pub const COUNTRIES: [(&str, f64); 12] = [
    ("Q30", 0.30),
    ("Q145", 0.28),
    ("Q183", 0.26),
    ("Q142", 0.24),
    ("Q38", 0.22),
    ("Q29", 0.20),
    ("Q17", 0.18),
    ("Q148", 0.16),
    ("Q668", 0.14),
    ("Q159", 0.12),
    ("Q155", 0.10),
    ("Q1033", 0.08),
];

const WIKIS: [(&str, f64, f64); 6] = [
    ("enwiki", 0.7, 9000.0),
    ("dewiki", 0.3, 7000.0),
    ("frwiki", 0.25, 6000.0),
    ("jawiki", 0.15, 5000.0),
    ("zhwiki", 0.1, 4000.0),
    ("eswiki", 0.15, 3000.0),
];

fn item(q: &str, rank: &str) -> String {
    format!(
        r#"{{"mainsnak":{{"snaktype":"value","datavalue":{{"value":{{"entity-type":"item","id":"{q}"}},"type":"wikibase-entityid"}}}},"rank":"{rank}"}}"#
    )
}

fn time(year: i64, precision: u8) -> String {
    let sign = if year < 0 { '-' } else { '+' };
    format!(
        r#"{{"mainsnak":{{"snaktype":"value","datavalue":{{"value":{{"time":"{sign}{:04}-00-00T00:00:00Z","precision":{precision}}},"type":"time"}}}},"rank":"normal"}}"#,
        year.abs()
    )
}

pub struct Person {
    pub qid: String,
    pub female: bool,
    pub birth: i64,
    pub sitelinks: Vec<&'static str>,
}

pub struct Synthetic {
    /// One entity per element, without the array wrapper.
    pub lines: Vec<String>,
    pub people: Vec<Person>,
}

/// `n_humans` biographies plus the places they reference, a non-human every
/// tenth entity, and one malformed line per 5,000 entities.
pub fn synthetic(n_humans: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let mut people = Vec::new();
    for (i, (q, _)) in COUNTRIES.iter().enumerate() {
        lines.push(format!(
            r#"{{"id":"{q}","type":"item","claims":{{"P31":[{}]}},"sitelinks":{{}}}}"#,
            item("Q6256", "normal")
        ));
        lines.push(format!(
            r#"{{"id":"Q{}","type":"item","claims":{{"P31":[{}],"P17":[{}]}},"sitelinks":{{}}}}"#,
            900_000 + i,
            item("Q515", "normal"),
            item(q, "normal")
        ));
    }
    let mut next_id = 1_000_000u64;
    for _ in 0..n_humans {
        next_id += 1;
        if next_id.is_multiple_of(10) {
            lines.push(format!(
                r#"{{"id":"Q{next_id}","type":"item","claims":{{"P31":[{}]}},"sitelinks":{{}}}}"#,
                item("Q4167410", "normal")
            ));
            next_id += 1;
        }
        if next_id % 5000 == 1 {
            lines.push(format!(r#"{{"id":"Q{next_id}","claims":{{"P31":["#));
            next_id += 1;
        }
        let c = rng.random_range(0..COUNTRIES.len());
        let (country, propensity) = COUNTRIES[c];
        let birth: i64 = rng.random_range(1750..2006);
        let p_female = (propensity * (0.012 * (birth - 1950) as f64).exp()).min(0.9);
        let roll: f64 = rng.random();
        let gender = if roll < 0.02 {
            None
        } else if roll < 0.025 {
            Some("Q48270")
        } else if rng.random_bool(p_female) {
            Some("Q6581072")
        } else {
            Some("Q6581097")
        };
        let mut claims = vec![format!(r#""P31":[{}]"#, item("Q5", "normal"))];
        if let Some(g) = gender {
            claims.push(format!(r#""P21":[{}]"#, item(g, "normal")));
        }
        let precision = if rng.random_bool(0.05) { 7 } else { 9 };
        claims.push(format!(r#""P569":[{}]"#, time(birth, precision)));
        if birth < 1940 {
            claims.push(format!(
                r#""P570":[{}]"#,
                time(birth + rng.random_range(30..90), 9)
            ));
        }
        let pob: f64 = rng.random();
        if pob < 0.7 {
            claims.push(format!(
                r#""P19":[{}]"#,
                item(&format!("Q{}", 900_000 + c), "normal")
            ));
        } else if pob < 0.8 {
            claims.push(format!(r#""P19":[{}]"#, item(country, "normal")));
        }
        if rng.random_bool(0.8) {
            claims.push(format!(r#""P27":[{}]"#, item(country, "normal")));
        }
        let mut links: Vec<&'static str> = WIKIS
            .iter()
            .filter(|(_, p, _)| rng.random_bool(*p))
            .map(|(w, _, _)| *w)
            .collect();
        if links.is_empty() {
            links.push("enwiki");
        }
        let qid = format!("Q{next_id}");
        let mut sl = String::new();
        for (k, w) in links.iter().enumerate() {
            if k > 0 {
                sl.push(',');
            }
            write!(sl, r#""{w}":{{"site":"{w}","title":"Person {next_id}"}}"#).unwrap();
        }
        lines.push(format!(
            r#"{{"id":"{qid}","type":"item","claims":{{{}}},"sitelinks":{{{sl}}}}}"#,
            claims.join(",")
        ));
        people.push(Person {
            qid,
            female: gender == Some("Q6581072"),
            birth,
            sitelinks: links,
        });
    }
    Synthetic { lines, people }
}

pub fn dump_text(lines: &[String]) -> String {
    let mut s = String::from("[\n");
    s.push_str(&lines.join(",\n"));
    s.push_str("\n]\n");
    s
}

pub struct FixturePaths {
    pub dump: PathBuf,
    pub external: PathBuf,
    pub population: PathBuf,
    pub sizes: PathBuf,
    pub corpus: PathBuf,
}

/// Write a synthetic dump and every auxiliary input the reports can use.
pub fn write_fixture(dir: &Path, n_humans: usize, seed: u64) -> FixturePaths {
    let syn = synthetic(n_humans, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let paths = FixturePaths {
        dump: dir.join("dump.json"),
        external: dir.join("index.csv"),
        population: dir.join("population.csv"),
        sizes: dir.join("sizes.csv"),
        corpus: dir.join("corpus"),
    };
    fs::write(&paths.dump, dump_text(&syn.lines)).unwrap();

    let mut ext = String::from("country_qid,score\n");
    for (q, p) in COUNTRIES {
        writeln!(ext, "{q},{p}").unwrap();
    }
    fs::write(&paths.external, ext).unwrap();

    let mut pop = String::from("year,population\n");
    for y in 1700..=2010 {
        writeln!(
            pop,
            "{y},{:.0}",
            6.0e8 * (0.009 * f64::from(y - 1700)).exp()
        )
        .unwrap();
    }
    fs::write(&paths.population, pop).unwrap();

    let mut sizes = String::from("wiki,title,bytes\n");
    for p in &syn.people {
        for w in &p.sitelinks {
            let base = WIKIS.iter().find(|(x, _, _)| x == w).unwrap().2;
            let factor = if p.female { 0.88 } else { 1.0 };
            let bytes = (base * factor * rng.random_range(0.5..1.5)) as u64;
            writeln!(sizes, "{w},Person_{},{bytes}", &p.qid[1..]).unwrap();
        }
    }
    fs::write(&paths.sizes, sizes).unwrap();

    let lexicon = CelebrityLexicon::bundled();
    for p in syn
        .people
        .iter()
        .filter(|p| (1930..=1989).contains(&p.birth))
    {
        for w in &p.sitelinks {
            let Some(terms) = lexicon.terms_for(w) else {
                continue;
            };
            let title = format!("Person {}", &p.qid[1..]);
            let celeb = rng.random_bool(if p.female { 0.45 } else { 0.2 });
            let text = if celeb {
                let term = &terms[rng.random_range(0..terms.len())];
                format!("{{{{Infobox person|name={title}}}}}'''{title}''' ({}) is a [[{term}|{term}]].<ref>Source</ref> More text follows.", p.birth)
            } else {
                format!(
                    "'''{title}''' ({}) was a [[farmer]] and [[Local history|local historian]].",
                    p.birth
                )
            };
            let path = corpus_path(&paths.corpus, w, &title);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, text).unwrap();
        }
    }
    paths
}
