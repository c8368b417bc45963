//! A directory of JSON documents named by configuration hash. Writes go to
//! a temporary file in the same directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

pub const CACHE_ENV: &str = "CIBOUND_CACHE_DIR";
const DEFAULT_DIR: &str = ".cibound-cache";

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// Cache rooted at `$CIBOUND_CACHE_DIR`, or `.cibound-cache` in the working directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from(DEFAULT_DIR), PathBuf::from);
        Self { dir }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn get(&self, hash: &str) -> Option<String> {
        fs::read_to_string(self.entry(hash)).ok()
    }

    pub fn put(&self, hash: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating cache directory {}", self.dir.display()))?;
        write_atomic(&self.entry(hash), contents)
    }
}

/// Writes `contents` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Appends one line to `run.log` in `out_dir`, prefixed by the Unix time.
pub fn log_run(out_dir: &Path, line: &str) -> Result<()> {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_dir.join("run.log"))
        .with_context(|| format!("opening run log in {}", out_dir.display()))?;
    writeln!(f, "{secs} {line}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path().join("c"));
        assert!(cache.get("abc").is_none());
        cache.put("abc", "{\"x\":1}").unwrap();
        assert_eq!(cache.get("abc").unwrap(), "{\"x\":1}");
        let leftovers: Vec<_> = fs::read_dir(cache.dir())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
