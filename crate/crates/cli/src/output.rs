//! Report files: JSON stamped with the config hash, CSV tables, SVG plots.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub struct Output {
    dir: PathBuf,
    hash: String,
    svg: bool,
}

impl Output {
    pub fn new(dir: &Path, hash: &str, svg: bool) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf(), hash: hash.to_string(), svg })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `{"command", "config_hash", "report"}` and returns the text.
    pub fn json<T: Serialize>(&self, name: &str, command: &str, report: &T) -> Result<String> {
        let doc = serde_json::json!({
            "command": command,
            "config_hash": self.hash,
            "report": report,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write(name, text.as_bytes())?;
        Ok(text)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
        self.write(name, &bytes)
    }

    pub fn svg(&self, name: &str, contents: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            self.write(name, contents().as_bytes())?;
        }
        Ok(())
    }
}
