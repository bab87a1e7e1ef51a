use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub response_text: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

/// Append-only directory of `<key>.json` files. Existing entries are never
/// rewritten.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| LlmError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, LlmError> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(LlmError::Cache(format!("{}: {e}", path.display()))),
        };
        let entry: CacheEntry = serde_json::from_str(&text)
            .map_err(|e| LlmError::Cache(format!("{}: {e}", path.display())))?;
        if entry.key != key {
            return Err(LlmError::Cache(format!(
                "{}: stored key {} does not match file name",
                path.display(),
                entry.key
            )));
        }
        Ok(Some(entry))
    }

    /// Stores a response unless the key is already present.
    pub fn put(&self, key: &str, response_text: &str) -> Result<(), LlmError> {
        let path = self.path_for(key);
        if path.exists() {
            return Ok(());
        }
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let entry = CacheEntry {
            key: key.to_string(),
            response_text: response_text.to_string(),
            created_at,
        };
        let body = serde_json::to_vec_pretty(&entry).expect("entry serializes");
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let err = |e: std::io::Error| LlmError::Cache(format!("{}: {e}", path.display()));
        let mut f = fs::File::create(&tmp).map_err(err)?;
        f.write_all(&body).map_err(err)?;
        f.sync_all().map_err(err)?;
        fs::rename(&tmp, &path).map_err(err)?;
        Ok(())
    }
}
