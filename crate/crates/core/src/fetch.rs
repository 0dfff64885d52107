//! Rate-limited article fetching with an on-disk cache.
//!
//! The cache uses the directory corpus layout, so a populated cache doubles as
//! a [`DirCorpus`](crate::celebrity::DirCorpus).

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::{StatusCode, Url};

use crate::celebrity::corpus_path;
use crate::error::FetchError;

#[derive(Debug, Clone)]
pub struct FetchConfig {
    /// URL of the raw-wikitext endpoint; `{lang}` is replaced by the language
    /// subdomain. The title is passed as the `title` query parameter.
    pub endpoint: String,
    pub user_agent: String,
    pub cache_dir: PathBuf,
    pub offline: bool,
    /// Minimum spacing between requests to one host.
    pub min_interval: Duration,
    pub max_retries: u32,
    pub base_backoff: Duration,
    pub timeout: Duration,
}

impl FetchConfig {
    pub fn new(cache_dir: PathBuf, user_agent: impl Into<String>) -> Self {
        Self {
            endpoint: "https://{lang}.wikipedia.org/w/index.php".into(),
            user_agent: user_agent.into(),
            cache_dir,
            offline: false,
            min_interval: Duration::from_secs(1),
            max_retries: 3,
            base_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

/// `enwiki` → `en`, `zh_yuewiki` → `zh-yue`.
pub fn language_subdomain(wiki: &str) -> Result<String, FetchError> {
    let lang = wiki
        .strip_suffix("wiki")
        .filter(|l| !l.is_empty() && l.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'))
        .ok_or_else(|| FetchError::BadWiki(wiki.to_string()))?;
    Ok(lang.replace('_', "-"))
}

type HostSlot = Arc<Mutex<Option<Instant>>>;

pub struct ArticleFetcher {
    config: FetchConfig,
    client: Option<Client>,
    hosts: Mutex<HashMap<String, HostSlot>>,
}

impl ArticleFetcher {
    pub fn new(config: FetchConfig) -> Result<Self, FetchError> {
        let client = if config.offline {
            None
        } else {
            if config.user_agent.trim().is_empty() {
                return Err(FetchError::MissingUserAgent);
            }
            let client = Client::builder()
                .user_agent(config.user_agent.clone())
                .timeout(config.timeout)
                .build()
                .map_err(|e| FetchError::Transport {
                    wiki: String::new(),
                    title: String::new(),
                    message: e.to_string(),
                })?;
            Some(client)
        };
        Ok(Self {
            config,
            client,
            hosts: Mutex::new(HashMap::new()),
        })
    }

    /// Cached text if present, otherwise fetch, cache and return it.
    pub fn fetch_article(&self, wiki: &str, title: &str) -> Result<String, FetchError> {
        let lang = language_subdomain(wiki)?;
        let path = corpus_path(&self.config.cache_dir, wiki, title);
        if let Ok(text) = std::fs::read_to_string(&path) {
            return Ok(text);
        }
        let Some(client) = &self.client else {
            return Err(FetchError::Offline {
                wiki: wiki.into(),
                title: title.into(),
            });
        };
        let base = self.config.endpoint.replace("{lang}", &lang);
        let url =
            Url::parse_with_params(&base, &[("title", title), ("action", "raw")]).map_err(|e| {
                FetchError::Transport {
                    wiki: wiki.into(),
                    title: title.into(),
                    message: e.to_string(),
                }
            })?;
        let text = self.request_with_retries(client, url, wiki, title)?;
        self.store(&path, &text)?;
        Ok(text)
    }

    fn host_slot(&self, host: &str) -> HostSlot {
        let mut hosts = self.hosts.lock().expect("host map poisoned");
        hosts.entry(host.to_string()).or_default().clone()
    }

    fn request_with_retries(
        &self,
        client: &Client,
        url: Url,
        wiki: &str,
        title: &str,
    ) -> Result<String, FetchError> {
        let slot = self.host_slot(url.host_str().unwrap_or(""));
        let mut attempt = 0;
        loop {
            let result = {
                // holding the slot serializes requests to this host
                let mut last = slot.lock().expect("host slot poisoned");
                if let Some(prev) = *last {
                    let wait = self.config.min_interval.saturating_sub(prev.elapsed());
                    if !wait.is_zero() {
                        thread::sleep(wait);
                    }
                }
                let r = client.get(url.clone()).send();
                *last = Some(Instant::now());
                r
            };
            let retryable = match result {
                Ok(resp) => match resp.status() {
                    s if s.is_success() => {
                        return resp.text().map_err(|e| FetchError::Transport {
                            wiki: wiki.into(),
                            title: title.into(),
                            message: e.to_string(),
                        })
                    }
                    StatusCode::NOT_FOUND => {
                        return Err(FetchError::MissingPage {
                            wiki: wiki.into(),
                            title: title.into(),
                        })
                    }
                    s if s == StatusCode::TOO_MANY_REQUESTS || s.is_server_error() => {
                        FetchError::Http {
                            status: s.as_u16(),
                            wiki: wiki.into(),
                            title: title.into(),
                        }
                    }
                    s => {
                        return Err(FetchError::Http {
                            status: s.as_u16(),
                            wiki: wiki.into(),
                            title: title.into(),
                        })
                    }
                },
                Err(e) => FetchError::Transport {
                    wiki: wiki.into(),
                    title: title.into(),
                    message: e.to_string(),
                },
            };
            if attempt >= self.config.max_retries {
                return Err(retryable);
            }
            log::warn!(
                "{retryable}; retry {} of {}",
                attempt + 1,
                self.config.max_retries
            );
            thread::sleep(self.config.base_backoff * 2u32.pow(attempt));
            attempt += 1;
        }
    }

    /// Write through a temporary file in the target directory, then rename.
    fn store(&self, path: &std::path::Path, text: &str) -> Result<(), FetchError> {
        let dir = path.parent().expect("cache path has a parent");
        let cache_err = |source| FetchError::Cache {
            path: path.to_path_buf(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(cache_err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(cache_err)?;
        tmp.write_all(text.as_bytes()).map_err(cache_err)?;
        tmp.persist(path).map_err(|e| cache_err(e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Serve canned responses in order, recording each request line.
    fn serve(
        responses: Vec<(u16, &'static str)>,
    ) -> (String, Arc<Mutex<Vec<String>>>, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let hits = Arc::new(AtomicUsize::new(0));
        let (seen2, hits2) = (seen.clone(), hits.clone());
        thread::spawn(move || {
            for (status, body) in responses {
                let Ok((mut stream, _)) = listener.accept() else {
                    return;
                };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let mut ua = String::new();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line.to_ascii_lowercase().starts_with("user-agent:") {
                        ua = line.trim().to_string();
                    }
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                seen2
                    .lock()
                    .unwrap()
                    .push(format!("{} {}", request_line.trim(), ua));
                hits2.fetch_add(1, Ordering::SeqCst);
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/{{lang}}/index.php"), seen, hits)
    }

    fn config(endpoint: String, dir: &std::path::Path) -> FetchConfig {
        FetchConfig {
            endpoint,
            min_interval: Duration::from_millis(150),
            base_backoff: Duration::from_millis(10),
            ..FetchConfig::new(dir.to_path_buf(), "wigi-test/0.1 (test@example.org)")
        }
    }

    #[test]
    fn fetches_then_serves_from_cache() {
        let dir = tempfile::tempdir().unwrap();
        let (endpoint, seen, hits) = serve(vec![(200, "'''Ada''' was a mathematician")]);
        let f = ArticleFetcher::new(config(endpoint, dir.path())).unwrap();
        assert_eq!(
            f.fetch_article("enwiki", "Ada Lovelace").unwrap(),
            "'''Ada''' was a mathematician"
        );
        assert_eq!(
            f.fetch_article("enwiki", "Ada Lovelace").unwrap(),
            "'''Ada''' was a mathematician"
        );
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        let line = seen.lock().unwrap()[0].clone();
        assert!(
            line.contains("/en/index.php?title=Ada+Lovelace&action=raw"),
            "{line}"
        );
        assert!(line.contains("wigi-test/0.1"), "{line}");
        assert!(dir.path().join("enwiki/Ada_Lovelace.txt").exists());
    }

    #[test]
    fn missing_page_and_retries() {
        let dir = tempfile::tempdir().unwrap();
        let (endpoint, _, hits) = serve(vec![(404, ""), (503, ""), (503, ""), (200, "ok")]);
        let f = ArticleFetcher::new(config(endpoint, dir.path())).unwrap();
        assert!(matches!(
            f.fetch_article("dewiki", "Nope"),
            Err(FetchError::MissingPage { .. })
        ));
        assert_eq!(f.fetch_article("dewiki", "Flaky").unwrap(), "ok");
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn retries_are_capped() {
        let dir = tempfile::tempdir().unwrap();
        let (endpoint, _, hits) = serve(vec![(500, ""); 5]);
        let f = ArticleFetcher::new(config(endpoint, dir.path())).unwrap();
        assert!(matches!(
            f.fetch_article("enwiki", "X"),
            Err(FetchError::Http { status: 500, .. })
        ));
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn requests_to_one_host_are_spaced() {
        let dir = tempfile::tempdir().unwrap();
        let (endpoint, _, _) = serve(vec![(200, "a"), (200, "b"), (200, "c")]);
        let f = ArticleFetcher::new(config(endpoint, dir.path())).unwrap();
        let start = Instant::now();
        for t in ["A", "B", "C"] {
            f.fetch_article("enwiki", t).unwrap();
        }
        assert!(start.elapsed() >= Duration::from_millis(300));
    }

    #[test]
    fn offline_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config("http://127.0.0.1:9/{lang}".into(), dir.path());
        c.offline = true;
        let f = ArticleFetcher::new(c.clone()).unwrap();
        let err = f.fetch_article("enwiki", "Missing Title").unwrap_err();
        assert!(matches!(err, FetchError::Offline { ref title, .. } if title == "Missing Title"));
        assert!(err.to_string().contains("enwiki:Missing Title"));
        std::fs::create_dir_all(dir.path().join("enwiki")).unwrap();
        std::fs::write(dir.path().join("enwiki/Cached.txt"), "hit").unwrap();
        assert_eq!(f.fetch_article("enwiki", "Cached").unwrap(), "hit");
        c.offline = false;
        c.user_agent = " ".into();
        assert!(matches!(
            ArticleFetcher::new(c),
            Err(FetchError::MissingUserAgent)
        ));
        assert_eq!(language_subdomain("zh_yuewiki").unwrap(), "zh-yue");
        assert!(language_subdomain("commons").is_err());
    }
}
