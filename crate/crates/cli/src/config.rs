use std::fs;
use std::path::Path;

use mapforge::{Error, Result};
use serde::{Deserialize, Serialize};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Resolved settings of one invocation, written next to its outputs.
/// `argv` replays the run through `mapforge rerun`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub version: String,
    pub argv: Vec<String>,
    pub settings: serde_json::Value,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64, argv: &[String], settings: impl Serialize) -> Self {
        RunConfig {
            command: command.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            argv: argv.to_vec(),
            settings: serde_json::to_value(settings).unwrap_or(serde_json::Value::Null),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(RUN_CONFIG_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let path = if path.is_dir() { path.join(RUN_CONFIG_FILE) } else { path.to_path_buf() };
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if cfg.argv.is_empty() {
            return Err(Error::InvalidParameter(format!("{} has no recorded arguments", path.display())));
        }
        Ok(cfg)
    }
}
