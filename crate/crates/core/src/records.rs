//! Per-prime result records and the line-delimited cache file behind the
//! sweep: a self-describing JSON header line followed by one JSON record per
//! prime. Appends are atomic per record, so an interrupted sweep leaves a
//! valid cache behind.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counts::PrimeSummary;

pub const SCHEMA_VERSION: u32 = 1;
const HEADER_FORMAT: &str = "logcycle-cache";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache {path}: line {line}: {msg}")]
    Corrupt { path: String, line: usize, msg: String },
    #[error("cache {path}: schema version {found}, expected {expected}")]
    VersionMismatch { path: String, found: u32, expected: u32 },
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    schema: u32,
}

/// One cached prime: every exact count plus timing metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub schema: u32,
    pub summary: PrimeSummary,
    pub wall_ms: u64,
}

impl PrimeRecord {
    pub fn new(summary: PrimeSummary, wall_ms: u64) -> Self {
        PrimeRecord { schema: SCHEMA_VERSION, summary, wall_ms }
    }

    pub fn p(&self) -> u64 {
        self.summary.p
    }
}

/// In-memory view of a cache file, keyed by prime.
pub struct Cache {
    path: Option<PathBuf>,
    records: BTreeMap<u64, PrimeRecord>,
}

impl Cache {
    /// A cache with no backing file (records live only in memory).
    pub fn in_memory() -> Self {
        Cache { path: None, records: BTreeMap::new() }
    }

    /// Open (or create on first append) the cache at `path`, loading and
    /// validating every existing record.
    pub fn open(path: &Path) -> Result<Self, CacheError> {
        let mut cache = Cache { path: Some(path.to_path_buf()), records: BTreeMap::new() };
        if !path.exists() {
            return Ok(cache);
        }
        let pstr = path.display().to_string();
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| CacheError::Corrupt {
            path: pstr.clone(),
            line: 1,
            msg: "empty cache file (missing header)".into(),
        })?;
        let header: Header = serde_json::from_str(&first?).map_err(|e| CacheError::Corrupt {
            path: pstr.clone(),
            line: 1,
            msg: format!("bad header: {e}"),
        })?;
        if header.format != HEADER_FORMAT {
            return Err(CacheError::Corrupt {
                path: pstr,
                line: 1,
                msg: format!("unknown format {:?}", header.format),
            });
        }
        if header.schema != SCHEMA_VERSION {
            return Err(CacheError::VersionMismatch {
                path: pstr,
                found: header.schema,
                expected: SCHEMA_VERSION,
            });
        }
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: PrimeRecord = serde_json::from_str(&line).map_err(|e| CacheError::Corrupt {
                path: pstr.clone(),
                line: idx + 1,
                msg: e.to_string(),
            })?;
            if rec.schema != SCHEMA_VERSION {
                return Err(CacheError::VersionMismatch {
                    path: pstr.clone(),
                    found: rec.schema,
                    expected: SCHEMA_VERSION,
                });
            }
            cache.records.insert(rec.p(), rec);
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
    pub fn contains(&self, p: u64) -> bool {
        self.records.contains_key(&p)
    }
    pub fn get(&self, p: u64) -> Option<&PrimeRecord> {
        self.records.get(&p)
    }
    pub fn records(&self) -> impl Iterator<Item = &PrimeRecord> {
        self.records.values()
    }

    /// Append one record (writing the header first if the file is new).
    pub fn append(&mut self, rec: PrimeRecord) -> Result<(), CacheError> {
        if let Some(path) = &self.path {
            let new_file = !path.exists();
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            if new_file {
                let header = Header { format: HEADER_FORMAT.into(), schema: SCHEMA_VERSION };
                writeln!(f, "{}", serde_json::to_string(&header).expect("header serializes"))?;
            }
            let line = serde_json::to_string(&rec).expect("record serializes");
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        self.records.insert(rec.p(), rec);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimeContext;
    use crate::counts::{summarize, TcMethod};

    fn record_for(p: u64) -> PrimeRecord {
        let ctx = PrimeContext::new(p).unwrap();
        PrimeRecord::new(summarize(&ctx, TcMethod::Smith).unwrap(), 1)
    }

    #[test]
    fn round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut cache = Cache::open(&path).unwrap();
        for p in [5u64, 7, 11, 13] {
            cache.append(record_for(p)).unwrap();
        }
        let reread = Cache::open(&path).unwrap();
        assert_eq!(reread.len(), 4);
        for p in [5u64, 7, 11, 13] {
            assert_eq!(reread.get(p), cache.get(p));
        }
    }

    #[test]
    fn corrupt_line_is_reported_with_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut cache = Cache::open(&path).unwrap();
        cache.append(record_for(5)).unwrap();
        std::fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .and_then(|mut f| writeln!(f, "{{garbage"))
            .unwrap();
        match Cache::open(&path) {
            Err(CacheError::Corrupt { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected corrupt-line error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        std::fs::write(&path, "{\"format\":\"logcycle-cache\",\"schema\":999}\n").unwrap();
        assert!(matches!(
            Cache::open(&path),
            Err(CacheError::VersionMismatch { found: 999, .. })
        ));
    }
}
