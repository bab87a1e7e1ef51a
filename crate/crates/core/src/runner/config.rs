use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::induction::InductionConfig;
use crate::llm::OpenAiConfig;
use crate::optimizer::OptimizerConfig;
use crate::prompt::TaskKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    /// One JSON object per line with `source` and `references`.
    Jsonl,
    /// M2 annotations; references are the per-annotator corrections.
    M2,
    /// A source file plus line-aligned reference files (`--refs`).
    Asset,
    /// Plain inputs, one per line, no references.
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub refs: Vec<PathBuf>,
    pub format: Option<DataFormat>,
    pub train_size: usize,
    pub dev_size: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: None,
            refs: Vec::new(),
            format: None,
            train_size: 200,
            dev_size: 200,
        }
    }
}

/// Everything that determines a run. Resolved from built-in defaults, then
/// an optional JSON file, then command-line flags, and stored with the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub task: TaskKind,
    pub seed: u64,
    pub data: DataConfig,
    pub backend: OpenAiConfig,
    pub induction: InductionConfig,
    pub optimizer: OptimizerConfig,
    /// Answer every model call from `script` instead of the network.
    pub dry_run: bool,
    pub script: Option<PathBuf>,
    /// Response cache directory; defaults to `<runs dir>/cache`. Not used in
    /// dry runs.
    pub cache_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            task: TaskKind::Gec,
            seed: 0,
            data: DataConfig::default(),
            backend: OpenAiConfig::default(),
            induction: InductionConfig::default(),
            optimizer: OptimizerConfig::default(),
            dry_run: false,
            script: None,
            cache_dir: None,
        }
    }
}

impl Config {
    /// Defaults overlaid with `file`, if given. Missing keys keep their
    /// defaults; unknown keys are rejected.
    pub fn load(file: Option<&Path>) -> Result<Self, RunError> {
        let mut config = match file {
            None => Config::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| RunError::Usage(format!("config file {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| RunError::Usage(format!("config file {}: {e}", path.display())))?
            }
        };
        config.sync_seeds();
        Ok(config)
    }

    /// Copies the run seed into the sub-configurations.
    pub fn sync_seeds(&mut self) {
        self.induction.seed = self.seed;
        self.optimizer.seed = self.seed;
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.optimizer
            .validate()
            .map_err(|e| RunError::Usage(e.to_string()))?;
        if self.induction.n_trials == 0 || self.induction.n_instructions == 0 {
            return Err(RunError::Usage(
                "induction needs n_trials >= 1 and n_instructions >= 1".into(),
            ));
        }
        if self.dry_run && self.script.is_none() {
            return Err(RunError::Usage("--dry-run needs --script <file>".into()));
        }
        Ok(())
    }
}
