//! Run configuration: JSON file, `--set key=value` overrides, content hash.

use anyhow::{bail, Context, Result};
use fracbubble_core::bubble::{validate, FracDims};
use fracbubble_core::cache::{content_hash, DiskCache};
use fracbubble_core::rate::default_ladder;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Space dimension N.
    pub dim: usize,
    /// Fractional order s.
    pub order: f64,
    /// Side lengths of the box domain.
    pub lengths: Vec<f64>,
    /// Spectral mode cutoff M for the spectral cross-checks.
    pub cutoff: usize,
    /// Quadrature nodes per half-wave of the top mode.
    pub grid_resolution: usize,
    /// Separation of centers from each other and from the boundary.
    pub eta: f64,
    pub ladder: Vec<f64>,
    /// Number of bubbles in `solve`.
    pub k: usize,
    pub signs: Vec<f64>,
    pub seeds_per_coord: usize,
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Cells per axis of the brute-force φ grid.
    pub heatmap_points: usize,
    /// Solve at this single ε instead of the ladder.
    pub solve_eps: Option<f64>,
    /// Replaces the closed-form bubble amplitude (negative controls).
    pub amplitude: Option<f64>,
    pub svg: bool,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            order: 0.4,
            lengths: vec![1.0],
            cutoff: 1024,
            grid_resolution: 8,
            eta: 1e-8,
            ladder: default_ladder(),
            k: 2,
            signs: vec![1.0, -1.0],
            seeds_per_coord: 5,
            tol_rel: 1e-7,
            max_iter: 400,
            heatmap_points: 200,
            solve_eps: None,
            amplitude: None,
            svg: true,
            output_dir: PathBuf::from("fracbubble-out"),
            cache_dir: None,
        }
    }
}

/// Marks errors that should exit with the usage/config code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))?
            }
            None => serde_json::to_value(RunConfig::default())?,
        };
        let map = value.as_object_mut().ok_or_else(|| usage("config must be a JSON object"))?;
        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| usage(format!("override `{ov}` is not key=value")))?;
            let parsed = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.trim().to_string(), parsed);
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| usage(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        validate(self.dim, self.order).map_err(|e| usage(e.to_string()))?;
        if self.lengths.len() != self.dim || self.lengths.iter().any(|l| !(*l > 0.0)) {
            bail!(usage(format!("need {} positive side lengths", self.dim)));
        }
        if self.ladder.is_empty() || self.ladder.windows(2).any(|w| !(w[1] < w[0])) || self.ladder.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            bail!(usage("ladder must be strictly decreasing inside (0, 1)"));
        }
        if self.signs.len() != self.k || self.k == 0 || self.signs.iter().any(|s| s.abs() != 1.0) {
            bail!(usage("signs must hold k entries of ±1"));
        }
        if !(self.eta > 0.0 && self.tol_rel > 0.0) {
            bail!(usage("eta and tolerances must be positive"));
        }
        if self.cutoff == 0 || self.seeds_per_coord == 0 || self.max_iter == 0 || self.heatmap_points < 2 {
            bail!(usage("cutoff, seeds, iteration and grid counts must be positive"));
        }
        if let Some(e) = self.solve_eps {
            if !(e > 0.0 && e < 1.0) {
                bail!(usage("solve_eps must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Hash of everything that affects results (paths excluded).
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
            m.remove("cache_dir");
        }
        content_hash(&v)[..16].to_string()
    }

    pub fn dims(&self) -> Result<FracDims> {
        let d = match self.amplitude {
            Some(a) => FracDims::with_amplitude(self.dim, self.order, a),
            None => FracDims::new(self.dim, self.order),
        };
        d.map_err(|e| usage(e.to_string()))
    }

    /// Config field first, then `FRACBUBBLE_CACHE_DIR`.
    pub fn cache(&self) -> Result<Option<DiskCache>> {
        match &self.cache_dir {
            Some(d) => Ok(Some(DiskCache::new(d)?)),
            None => Ok(DiskCache::from_env()?),
        }
    }

    pub fn require_interval(&self, what: &str) -> Result<()> {
        if self.dim != 1 {
            bail!(usage(format!("{what} runs on intervals (N = 1)")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().check().unwrap();
    }

    #[test]
    fn hash_ignores_paths_only() {
        let a = RunConfig::default();
        let b = RunConfig { output_dir: "elsewhere".into(), cache_dir: Some("c".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { order: 0.1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn overrides_parse_json_values() {
        let c = RunConfig::load(None, &["order=0.1".into(), "ladder=[0.01,0.001,0.0001,0.00001]".into(), "output_dir=out".into()]).unwrap();
        assert_eq!(c.order, 0.1);
        assert_eq!(c.ladder.len(), 4);
        assert_eq!(c.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn invalid_settings_are_usage_errors() {
        for ov in ["order=0.6", "ladder=[0.01,0.02,0.001,0.0001]", "eta=0", "k=3", "nope=1", "order"] {
            let err = RunConfig::load(None, &[ov.to_string()]).unwrap_err();
            assert!(err.downcast_ref::<UsageError>().is_some(), "{ov}: {err}");
        }
        let err = RunConfig::load(None, &["order=0.6".into()]).unwrap_err();
        assert!(err.to_string().contains("N > 2s violated"));
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"order": 0.3, "eta": 0.001}"#).unwrap();
        let c = RunConfig::load(Some(&path), &["eta=0.01".into()]).unwrap();
        assert_eq!((c.order, c.eta), (0.3, 0.01));
        assert_eq!(c.lengths, vec![1.0]);
    }
}
