//! Persisted census results: one JSON object per line, append-only.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use exact_lp::Fraction;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CensusError;
use crate::lattice::StateSet;
use crate::ppt::{AlphaResult, Method};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub t: u32,
    pub k: usize,
    pub set: String,
    pub alpha: Fraction,
    pub distinguishable: bool,
    pub method: Method,
    pub certificate_digest: String,
    /// RFC 3339; `None` when runs are made reproducible byte for byte.
    pub timestamp: Option<String>,
}

impl CensusRecord {
    pub fn new(set: &StateSet, result: &AlphaResult, stamp: bool) -> Self {
        let digest = Sha256::digest(result.certificate.to_json(set).as_bytes());
        Self {
            t: set.t(),
            k: set.k(),
            set: set.to_string(),
            alpha: result.alpha.clone(),
            distinguishable: result.distinguishable,
            method: result.method,
            certificate_digest: hex::encode(digest),
            timestamp: stamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }

    pub fn state_set(&self) -> Result<StateSet, CensusError> {
        StateSet::parse(&self.set).map_err(CensusError::from)
    }

    /// Shape and value invariants: canonical set matching `t`, `k`;
    /// `1/k ≤ alpha ≤ 1`; `distinguishable ⇔ alpha = 1`.
    pub fn check(&self) -> Result<(), String> {
        let set = StateSet::parse(&self.set).map_err(|e| e.to_string())?;
        if set.to_string() != self.set || set.t() != self.t || set.k() != self.k {
            return Err(format!("set {:?} does not match t = {}, k = {}", self.set, self.t, self.k));
        }
        if self.alpha < Fraction::new(1, self.k as i64) || self.alpha > Fraction::one() {
            return Err(format!("alpha {} outside [1/{}, 1]", self.alpha, self.k));
        }
        if self.distinguishable != self.alpha.is_one() {
            return Err("distinguishable flag disagrees with alpha".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorruptLine {
    pub line: usize,
    pub reason: String,
}

/// Append-only JSONL store keyed by `(t, canonical set)`. The latest line
/// for a key wins. Without a path the cache lives in memory only.
#[derive(Debug)]
pub struct CensusCache {
    path: Option<PathBuf>,
    file: Option<File>,
    records: BTreeMap<(u32, String), CensusRecord>,
    corrupt: Vec<CorruptLine>,
}

fn io_error(path: &Path, source: std::io::Error) -> CensusError {
    CensusError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl CensusCache {
    pub const FILE_NAME: &'static str = "records.jsonl";

    pub fn in_memory() -> Self {
        Self {
            path: None,
            file: None,
            records: BTreeMap::new(),
            corrupt: Vec::new(),
        }
    }

    /// Opens (creating if needed) `dir/records.jsonl` and loads every valid
    /// line. Unparseable lines are skipped and listed in [`Self::corrupt_lines`].
    pub fn open(dir: &Path) -> Result<Self, CensusError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(Self::FILE_NAME);
        let mut cache = Self::in_memory();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(|e| io_error(&path, e))?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| io_error(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<CensusRecord>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(|r| r.check().map(|_| r));
                match parsed {
                    Ok(record) => {
                        cache.records.insert((record.t, record.set.clone()), record);
                    }
                    Err(reason) => cache.corrupt.push(CorruptLine { line: i + 1, reason }),
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| io_error(&path, e))?;
        cache.path = Some(path);
        cache.file = Some(file);
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, set: &StateSet) -> Option<&CensusRecord> {
        self.records.get(&(set.t(), set.to_string()))
    }

    /// Looks up a textual key such as `"31,00,11,21"`, canonicalizing it first.
    pub fn read(&self, key: &str) -> Result<Option<&CensusRecord>, CensusError> {
        let set = StateSet::parse(key).map_err(|_| CensusError::BadKey(key.to_string()))?;
        Ok(self.get(&set))
    }

    pub fn write(&mut self, record: CensusRecord) -> Result<(), CensusError> {
        if let (Some(file), Some(path)) = (self.file.as_mut(), self.path.as_ref()) {
            let mut line = serde_json::to_string(&record).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(|e| io_error(path, e))?;
        }
        self.records.insert((record.t, record.set.clone()), record);
        Ok(())
    }

    /// Latest record per key, ordered by `(t, set)`.
    pub fn records(&self) -> impl Iterator<Item = &CensusRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn corrupt_lines(&self) -> &[CorruptLine] {
        &self.corrupt
    }
}

/// CSV with the same columns as the JSONL records.
pub fn write_csv<'a, W: Write>(records: impl IntoIterator<Item = &'a CensusRecord>, out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppt::{alpha, AlphaMode};

    fn record(text: &str) -> CensusRecord {
        let set = StateSet::parse(text).unwrap();
        CensusRecord::new(&set, &alpha(&set, AlphaMode::Exact), false)
    }

    #[test]
    fn write_then_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = record("00,11,21,31");
        assert_eq!(r.alpha, Fraction::new(7, 8));
        assert_eq!(r.certificate_digest.len(), 64);
        {
            let mut cache = CensusCache::open(dir.path()).unwrap();
            assert!(cache.read("00,11,21,31").unwrap().is_none());
            cache.write(r.clone()).unwrap();
        }
        let cache = CensusCache::open(dir.path()).unwrap();
        assert_eq!(cache.read("31,21,11,00").unwrap(), Some(&r));
        assert!(cache.read("00,00").is_err());
        assert!(cache.read("01,02,03,10").unwrap().is_none());
    }

    #[test]
    fn corrupt_lines_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let good = serde_json::to_string(&record("00,01")).unwrap();
        let mut bad_alpha = record("00,11,21,31");
        bad_alpha.distinguishable = true;
        let lines = [good.as_str(), "{not json", &serde_json::to_string(&bad_alpha).unwrap(), ""];
        fs::write(dir.path().join(CensusCache::FILE_NAME), lines.join("\n")).unwrap();
        let cache = CensusCache::open(dir.path()).unwrap();
        assert_eq!(cache.len(), 1);
        let lines: Vec<usize> = cache.corrupt_lines().iter().map(|c| c.line).collect();
        assert_eq!(lines, vec![2, 3]);
    }

    #[test]
    fn json_and_csv_fields() {
        let r = record("00,11,21,31");
        let json: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(json["alpha"], "7/8");
        assert_eq!(json["method"], "exact-lp");
        assert_eq!(json["set"], "00,11,21,31");
        assert!(json["timestamp"].is_null());
        let mut out = Vec::new();
        write_csv([&r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,k,set,alpha,distinguishable,method,certificate_digest,timestamp\n"));
        assert!(text.contains("2,4,\"00,11,21,31\",7/8,false,exact-lp,"));
    }
}
