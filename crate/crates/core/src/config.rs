//! Run configuration, read from TOML.
//!
//! ```toml
//! [surface]
//! kind = "catenoid"      # disk | catenoid | synthetic
//! resolution = 6
//! genus = 1              # synthetic only
//! boundaries = 1         # synthetic only
//!
//! [run]
//! levels = [0, 1, 2]
//! checks = ["PPC_A", "JC", "ER", "IB"]
//! jacobi_count = 8
//! hodge_count = 14
//! j_max = 5
//! deterministic = true
//! seed = 7
//! matrix_market = false
//!
//! [tolerances]
//! JC = 0.05
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::surfaces::SurfaceKind;
use crate::verify::CheckId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Disk,
    Catenoid,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: KindName,
    pub resolution: usize,
    /// Synthetic only; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<usize>,
    /// Synthetic only; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    /// Check names; empty means every check that applies to the surface.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_jacobi_count")]
    pub jacobi_count: usize,
    #[serde(default = "default_hodge_count")]
    pub hodge_count: usize,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub matrix_market: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_levels() -> Vec<usize> {
    vec![0, 1, 2]
}
fn default_jacobi_count() -> usize {
    8
}
fn default_hodge_count() -> usize {
    14
}
fn default_j_max() -> usize {
    5
}
fn default_seed() -> u64 {
    7
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            levels: default_levels(),
            checks: vec![],
            jacobi_count: default_jacobi_count(),
            hodge_count: default_hodge_count(),
            j_max: default_j_max(),
            deterministic: false,
            seed: default_seed(),
            matrix_market: false,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub run: RunSection,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

/// 1-based line of a byte offset.
fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key = ...` first appears, or 1.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| l.trim_start().strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('=')))
        .map_or(1, |i| i + 1)
}

impl RunConfig {
    pub fn new(surface: SurfaceConfig) -> Self {
        RunConfig { surface, run: RunSection::default(), tolerances: BTreeMap::new() }
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config {
            line: e.span().map_or(1, |s| line_at(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| PipelineError::Config { line: line_of_key(text, key), message })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks the invariants; the error names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let s = &self.surface;
        if s.kind == KindName::Synthetic && s.boundaries == Some(0) {
            return Err(("boundaries", "synthetic surfaces need k ≥ 1 boundary components".into()));
        }
        if s.kind != KindName::Synthetic {
            if s.genus.is_some() {
                return Err(("genus", "genus applies to synthetic surfaces only".into()));
            }
            if s.boundaries.is_some() {
                return Err(("boundaries", "boundaries apply to synthetic surfaces only".into()));
            }
        }
        let l = &self.run.levels;
        if l.is_empty() {
            return Err(("levels", "the level ladder is empty".into()));
        }
        if l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(("levels", format!("levels {l:?} are not strictly increasing")));
        }
        for (key, v) in [("jacobi_count", self.run.jacobi_count), ("hodge_count", self.run.hodge_count), ("j_max", self.run.j_max)] {
            if v == 0 {
                return Err((key, format!("{key} must be at least 1")));
            }
        }
        for c in &self.run.checks {
            if CheckId::parse(c).is_none() {
                return Err(("checks", format!("unknown check {c:?}")));
            }
        }
        for (name, t) in &self.tolerances {
            if CheckId::parse(name).is_none() {
                return Err(("tolerances", format!("unknown check {name:?}")));
            }
            if !(t.is_finite() && *t >= 0.0) {
                return Err(("tolerances", format!("tolerance for {name} must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SurfaceKind {
        match self.surface.kind {
            KindName::Disk => SurfaceKind::Disk,
            KindName::Catenoid => SurfaceKind::Catenoid,
            KindName::Synthetic => SurfaceKind::Synthetic {
                genus: self.surface.genus.unwrap_or(0),
                boundaries: self.surface.boundaries.unwrap_or(1),
            },
        }
    }

    /// `(g, k)` of the configured surface.
    pub fn topology(&self) -> (usize, usize) {
        match self.kind() {
            SurfaceKind::Disk => (0, 1),
            SurfaceKind::Catenoid => (0, 2),
            SurfaceKind::Synthetic { genus, boundaries } => (genus, boundaries),
        }
    }

    /// Requested checks in canonical order; all of them when none are named.
    pub fn checks(&self) -> Vec<CheckId> {
        if self.run.checks.is_empty() {
            return CheckId::ALL.to_vec();
        }
        CheckId::ALL.into_iter().filter(|c| self.run.checks.iter().any(|s| CheckId::parse(s) == Some(*c))).collect()
    }

    pub fn tolerance(&self, id: CheckId) -> f64 {
        self.tolerances
            .iter()
            .find(|(k, _)| CheckId::parse(k) == Some(id))
            .map_or(id.default_tolerance(), |(_, v)| *v)
    }

    /// Canonical JSON text, the input of the config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[surface]
kind = "catenoid"
resolution = 6

[run]
levels = [0, 1, 2]
checks = ["jc", "ER"]
deterministic = true

[tolerances]
JC = 0.04
"#;

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.kind(), SurfaceKind::Catenoid);
        assert_eq!(c.checks(), vec![CheckId::Jc, CheckId::Er]);
        assert_eq!(c.tolerance(CheckId::Jc), 0.04);
        assert_eq!(c.tolerance(CheckId::Bc), 0.10);
        assert_eq!(c.run.seed, 7);
        assert_eq!(c.topology(), (0, 2));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SAMPLE.replace("levels = [0, 1, 2]", "levels = [0, 2, 1]");
        match RunConfig::parse(&bad) {
            Err(PipelineError::Config { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let syntax = SAMPLE.replace("resolution = 6", "resolution = ");
        match RunConfig::parse(&syntax) {
            Err(PipelineError::Config { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthetic_without_boundary_is_rejected() {
        let text = "[surface]\nkind = \"synthetic\"\nresolution = 6\ngenus = 1\nboundaries = 0\n";
        match RunConfig::parse(text) {
            Err(PipelineError::Config { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("k ≥ 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_zero_counts_and_unknown_checks() {
        assert!(RunConfig::parse(&SAMPLE.replace("deterministic = true", "jacobi_count = 0")).is_err());
        assert!(RunConfig::parse(&SAMPLE.replace("\"ER\"", "\"XX\"")).is_err());
        assert!(RunConfig::parse(&SAMPLE.replace("levels = [0, 1, 2]", "levels = []")).is_err());
    }
}
