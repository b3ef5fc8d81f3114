//! Tabular output: CSV tables with stable headers, real formatting that
//! round-trips bit-exactly, schema hashes and the run manifest.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Version of every CSV schema emitted by this crate. Bump when any header
/// changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Formats a real with 17 significant digits in scientific notation; parsing
/// the result gives back the same `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad real {s:?}: {e}")))
}

/// SHA-256 of the comma-joined header, prefixed with the schema version.
pub fn schema_hash(header: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(format!("v{SCHEMA_VERSION}:").as_bytes());
    h.update(header.join(",").as_bytes());
    format!("{:x}", h.finalize())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// A header plus string cells, as written to disk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))
    }

    pub fn schema_hash(&self) -> String {
        schema_hash(&self.header)
    }

    /// Comma-separated, LF line endings, header first.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Parse("CSV has no header".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse(e.to_string()),
    }
}

/// One output file recorded in a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub rows: usize,
    pub schema_hash: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub experiment: String,
    pub config: serde_json::Value,
    pub base_seed: u64,
    pub version: String,
    pub schema_version: u32,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputFile>,
    /// Hard invariant failures found after the run (empty when clean).
    pub failures: Vec<String>,
}
