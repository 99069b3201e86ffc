//! On-disk cache for expensive tables.
//!
//! Layout: one file per entry, `<kind>-<hash>.bin`, where `hash` is the
//! SHA-256 of the canonical JSON key. The file starts with a single JSON
//! header line `{"kind":..,"key":..,"len":..}` followed by `len`
//! little-endian f64 values. A header whose key differs from the requested
//! key is treated as a miss. Writes go to a temporary file in the same
//! directory and are renamed into place.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    key: serde_json::Value,
    len: usize,
}

pub fn content_hash(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("json values serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl DiskCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(DiskCache { dir: dir.as_ref().to_path_buf() })
    }

    /// Cache rooted at `FRACBUBBLE_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os("FRACBUBBLE_CACHE_DIR") {
            Some(d) if !d.is_empty() => Ok(Some(Self::new(d)?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, kind: &str, key: &serde_json::Value) -> PathBuf {
        self.dir.join(format!("{kind}-{}.bin", &content_hash(key)[..20]))
    }

    pub fn load(&self, kind: &str, key: &serde_json::Value) -> Option<Vec<f64>> {
        let file = std::fs::File::open(self.path(kind, key)).ok()?;
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        reader.read_line(&mut line).ok()?;
        let header: Header = serde_json::from_str(line.trim_end()).ok()?;
        if header.kind != kind || &header.key != key {
            return None;
        }
        let mut bytes = Vec::with_capacity(header.len * 8);
        reader.read_to_end(&mut bytes).ok()?;
        if bytes.len() != header.len * 8 {
            return None;
        }
        Some(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect(),
        )
    }

    pub fn store(&self, kind: &str, key: &serde_json::Value, data: &[f64]) -> Result<()> {
        let header = Header { kind: kind.to_string(), key: key.clone(), len: data.len() };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file_mut());
            serde_json::to_writer(&mut w, &header)?;
            w.write_all(b"\n")?;
            for v in data {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()?;
        }
        tmp.persist(self.path(kind, key)).map_err(|e| e.error)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_key_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::new(dir.path()).unwrap();
        let key = serde_json::json!({"m": 4, "l": [1.0]});
        assert!(c.load("t", &key).is_none());
        c.store("t", &key, &[1.0, -2.5, f64::MIN_POSITIVE]).unwrap();
        assert_eq!(c.load("t", &key).unwrap(), vec![1.0, -2.5, f64::MIN_POSITIVE]);
        let other = serde_json::json!({"m": 5, "l": [1.0]});
        assert!(c.load("t", &other).is_none());
    }
}
