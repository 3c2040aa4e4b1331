use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use symdirec::forge::Type4Config;
use symdirec::metrics::SimConfig;
use symdirec::pipeline::{DEFAULT_K, DEFAULT_N};
use symdirec::providers::ProviderConfig;

pub const DEFAULT_CONFIG: &str = "symdirec.toml";

/// A usage or configuration problem; the process exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Contents of the TOML configuration file. Relative paths are resolved
/// against the directory holding the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Knowledge-base index (`.jsonl`) or a corpus directory indexed on load.
    pub kb: Option<PathBuf>,
    /// Trained projection; `[I | I] / 2` when unset.
    pub projection: Option<PathBuf>,
    /// Directory of prompt template overrides.
    pub templates: Option<PathBuf>,
    /// Default synthesis task suite for `ablate`.
    pub tasks: Option<PathBuf>,
    pub run_dir: PathBuf,
    pub n: usize,
    pub k: usize,
    pub generation: ProviderConfig,
    pub embedding: ProviderConfig,
    pub simulator: SimConfig,
    pub type4: Type4Config,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kb: None,
            projection: None,
            templates: None,
            tasks: None,
            run_dir: PathBuf::from("runs"),
            n: DEFAULT_N,
            k: DEFAULT_K,
            generation: ProviderConfig::mock(),
            embedding: ProviderConfig::mock(),
            simulator: SimConfig::icarus(),
            type4: Type4Config::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn must_exist(field: &str, p: &Option<PathBuf>) -> anyhow::Result<()> {
    match p {
        Some(p) if !p.exists() => Err(config_error(format!(
            "config field `{field}`: {} does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

impl Config {
    /// Reads `path`, or `symdirec.toml` in the working directory when no
    /// path is given and that file exists; defaults otherwise.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let path = match path {
            Some(p) if !p.is_file() => {
                return Err(config_error(format!("config file {} not found", p.display())))
            }
            Some(p) => Some(p.to_path_buf()),
            None => Some(PathBuf::from(DEFAULT_CONFIG)).filter(|p| p.is_file()),
        };
        let mut cfg = match &path {
            None => Config::default(),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| config_error(format!("config file {}: {e}", p.display())))?;
                toml::from_str::<Config>(&text)
                    .map_err(|e| config_error(format!("config file {}: {e}", p.display())))?
            }
        };
        let base = path
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        for p in [&mut cfg.kb, &mut cfg.projection, &mut cfg.templates, &mut cfg.tasks]
            .into_iter()
            .flatten()
        {
            resolve(&base, p);
        }
        resolve(&base, &mut cfg.run_dir);
        for provider in [&mut cfg.generation, &mut cfg.embedding] {
            for p in provider.fixtures.iter_mut().chain(provider.record_misses.as_mut()) {
                resolve(&base, p);
            }
        }
        Ok(cfg)
    }

    /// Checks every field and every referenced path.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n == 0 {
            return Err(config_error("config field `n` must be at least 1"));
        }
        if self.k == 0 {
            return Err(config_error("config field `k` must be at least 1"));
        }
        must_exist("kb", &self.kb)?;
        must_exist("projection", &self.projection)?;
        must_exist("templates", &self.templates)?;
        must_exist("tasks", &self.tasks)?;
        for (field, p) in [("generation", &self.generation), ("embedding", &self.embedding)] {
            p.validate()
                .map_err(|e| config_error(format!("config field `{field}`: {e}")))?;
            for f in &p.fixtures {
                if !f.is_file() {
                    return Err(config_error(format!(
                        "config field `{field}.fixtures`: {} does not exist",
                        f.display()
                    )));
                }
            }
        }
        self.simulator
            .validate()
            .map_err(|e| config_error(format!("config field `simulator`: {e}")))?;
        Ok(())
    }

    pub fn require_kb(&self) -> anyhow::Result<&Path> {
        self.kb
            .as_deref()
            .ok_or_else(|| config_error("config field `kb` is required for this command"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_resolve_against_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("kb")).unwrap();
        let file = dir.path().join("c.toml");
        fs::write(&file, "kb = \"kb\"\nk = 3\n[generation]\nkind = \"mock\"\n").unwrap();
        let cfg = Config::load(Some(&file)).unwrap();
        assert_eq!(cfg.kb.as_deref(), Some(dir.path().join("kb").as_path()));
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.n, DEFAULT_N);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_and_zero_k_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        fs::write(&file, "kbb = \"x\"\n").unwrap();
        assert!(Config::load(Some(&file)).is_err());
        fs::write(&file, "k = 0\n").unwrap();
        let err = Config::load(Some(&file)).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("`k`"));
    }
}
