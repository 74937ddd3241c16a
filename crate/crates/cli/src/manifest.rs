use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use qfci::hamio::EnergyWindow;

use crate::{CliError, CliResult};

/// Everything needed to repeat a run. Stored as `<out>.manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    /// Working directory that relative paths in `argv` refer to.
    pub cwd: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub phase: Option<qfci::phase::PhaseConfig>,
    pub window: Option<EnergyWindow>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            cwd: std::env::current_dir().unwrap_or_default(),
            inputs: Vec::new(),
            phase: None,
            window: None,
            seed: None,
            output: None,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self) -> CliResult<()> {
        if let Some(out) = &self.output {
            let path = Self::path_for(out);
            let text = serde_json::to_string_pretty(self)?;
            std::fs::write(&path, text + "\n").map_err(|source| CliError::File { path, source })?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}
