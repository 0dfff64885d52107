//! Output directory handling: CSV tables, content hashes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Ratios and shares.
pub fn ratio(v: f64) -> String {
    format!("{v:.4}")
}

pub fn opt_ratio(v: Option<f64>) -> String {
    v.map(ratio).unwrap_or_default()
}

/// Estimates, statistics and means.
pub fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// Probabilities that may be very small.
pub fn prob(v: f64) -> String {
    format!("{v:.6e}")
}

pub fn hex_digest(h: Sha256) -> String {
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex_digest(Sha256::new_with_prefix(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let missing = |_| CliError::MissingInput {
        what: "input".into(),
        path: path.to_path_buf(),
    };
    let mut f = fs::File::open(path).map_err(missing)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(missing)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex_digest(h))
}

/// Reader that hashes everything read through it.
pub struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> HashingReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            hasher: Sha256::new(),
        }
    }

    pub fn digest(self) -> String {
        hex_digest(self.hasher)
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// The output directory plus what has been written to it in this run.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Output {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })?;
        self.written.insert(name.to_string(), sha256_bytes(bytes));
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.write(name, &table.to_bytes())
    }

    /// Record a file written by other means.
    pub fn record_written(&mut self, name: &str) -> Result<(), CliError> {
        let digest = sha256_file(&self.path(name))?;
        self.written.insert(name.to_string(), digest);
        Ok(())
    }

    pub fn written(&self) -> &BTreeMap<String, String> {
        &self.written
    }

    /// Paths inside the output directory are shown relative to it, so
    /// manifests of identical runs into different directories match.
    pub fn display(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| path.display().to_string())
    }
}

#[derive(Debug, Serialize)]
pub struct InputEntry {
    pub path: String,
    pub sha256: String,
}

/// Merge this run's entry into `manifest.json`, replacing an earlier entry with the same key.
pub fn update_manifest(
    out: &mut OutDir,
    key: &str,
    settings: &impl Serialize,
    inputs: &BTreeMap<String, InputEntry>,
    warnings: &[String],
) -> Result<(), CliError> {
    let path = out.path(MANIFEST);
    let mut manifest = fs::read(&path)
        .ok()
        .and_then(|b| serde_json::from_slice::<Value>(&b).ok())
        .filter(Value::is_object)
        .unwrap_or_else(|| json!({}));
    manifest["tool"] = json!("wigi");
    manifest["version"] = json!(env!("CARGO_PKG_VERSION"));
    if !manifest["runs"].is_object() {
        manifest["runs"] = json!({});
    }
    manifest["runs"][key] = json!({
        "settings": settings,
        "inputs": inputs,
        "outputs": out.written(),
        "warnings": warnings,
    });
    let mut bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })
}
