use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Config;
use super::RunError;
use crate::induction::TrialReport;
use crate::optimizer::OptimizerState;

pub const STATE_FILE: &str = "state.json";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Induction,
    Optimization,
    Inference,
    Evaluation,
    Done,
}

/// Model requests by profile, cached answers included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestCounts {
    pub explore: u64,
    pub infer: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMetric {
    pub candidate_id: u64,
    pub fitness: f64,
    pub metric: String,
    pub value: f64,
}

/// Results computed once optimization has finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub best_id: u64,
    /// Raw error of the best candidate on the whole dev split.
    pub full_dev_raw_error: f64,
    /// Task metric on the whole dev split for the top pool members.
    pub top: Vec<RankedMetric>,
}

/// Everything needed to continue a run. Contains no timestamps, so an
/// interrupted and resumed run ends with the same file as an uninterrupted
/// one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub run_id: String,
    pub command: String,
    pub config: Config,
    pub phase: Phase,
    pub epoch: usize,
    /// Template of the prompt the optimizer started from.
    pub seed_prompt: Option<String>,
    pub dev_subsample: Vec<usize>,
    pub induction: Vec<TrialReport>,
    pub optimizer: Option<OptimizerState>,
    /// Progress of a scripted backend.
    pub backend_state: Option<serde_json::Value>,
    /// Whether repeated greedy requests returned identical text; probed on
    /// live backends only.
    pub deterministic_infer: Option<bool>,
    pub requests: RequestCounts,
    pub final_report: Option<FinalReport>,
    /// Files written into the run directory.
    pub artifacts: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    sha256: String,
    state: serde_json::Value,
}

fn digest(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_vec(value).expect("value serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let err = |e: std::io::Error| RunError::Engine(format!("{}: {e}", path.display()));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("file");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(err)?;
    f.write_all(bytes).map_err(err)?;
    f.sync_all().map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

impl RunState {
    pub fn save(&self, dir: &Path) -> Result<(), RunError> {
        let state = serde_json::to_value(self).expect("state serializes");
        let envelope = Envelope {
            sha256: digest(&state),
            state,
        };
        let mut text = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
        text.push('\n');
        write_atomic(&dir.join(STATE_FILE), text.as_bytes())
    }

    /// Loads and verifies a state file. Any mismatch is an integrity error.
    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(STATE_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| RunError::Usage(format!("cannot read run state {}: {e}", path.display())))?;
        let integrity = |m: String| RunError::Engine(format!("integrity error in {}: {m}", path.display()));
        let envelope: Envelope = serde_json::from_str(&text).map_err(|e| integrity(e.to_string()))?;
        if digest(&envelope.state) != envelope.sha256 {
            return Err(integrity("checksum mismatch".into()));
        }
        let mut state: RunState = serde_json::from_value(envelope.state).map_err(|e| integrity(e.to_string()))?;
        state.config.sync_seeds();
        Ok(state)
    }
}

/// Exclusive ownership of a run directory, released on drop.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(RunError::Engine(format!(
                "run directory {} is locked by another process (delete {} if it is stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(RunError::Engine(format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
