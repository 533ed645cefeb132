//! `.meta` sidecars tying every output file to the configuration that made it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::langevin::RNG_DESCRIPTION;

use super::config::{coupling_name, RunConfig};

/// Facts about a run that the CSV does not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub command: String,
    pub config_hash: String,
    pub canonical_config: String,
    /// Extra `key = value` lines, rendered as TOML strings.
    pub entries: Vec<(String, String)>,
}

impl RunMeta {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let mut entries = vec![
            ("coupling".to_string(), coupling_name(cfg.coupling)),
            ("tau".to_string(), format!("{:e}", cfg.regime.tau)),
        ];
        if cfg.particles.is_some() {
            entries.push(("rng".into(), RNG_DESCRIPTION.into()));
        }
        Self {
            command: command.to_string(),
            config_hash: cfg.hash(),
            canonical_config: cfg.canonical().to_string(),
            entries,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", toml::Value::from(self.command.as_str()));
        let _ = writeln!(out, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "config_sha256 = \"{}\"", self.config_hash);
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {}", toml::Value::from(v.as_str()));
        }
        out.push_str("\n# canonical configuration, every default made explicit\n");
        out.push_str(&self.canonical_config);
        out
    }
}

/// `<path>.meta`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes `text` to `path` and the metadata next to it.
pub fn write_with_meta(path: &Path, text: &str, meta: &RunMeta) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    let mp = meta_path(path);
    std::fs::write(&mp, meta.render()).map_err(|e| Error::io(mp, e))
}
