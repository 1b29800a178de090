use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LocationSet;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CacheLine {
    config: String,
    locations: LocationSet,
}

/// Memoized coverage keyed by canonical configuration string.
///
/// When backed by a file, every new entry is appended as one JSON line, so a
/// later run can reuse it. Entries are never rewritten.
#[derive(Debug, Default)]
pub struct CoverageCache {
    entries: HashMap<String, LocationSet>,
    path: Option<PathBuf>,
    file: Option<File>,
}

impl CoverageCache {
    pub fn in_memory() -> Self {
        CoverageCache::default()
    }

    /// Opens (creating if needed) a cache file and loads its entries.
    /// `fresh` discards whatever the file held.
    pub fn open(path: impl AsRef<Path>, fresh: bool) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut entries = HashMap::new();
        if !fresh && path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheLine = serde_json::from_str(&line).map_err(|e| {
                    Error::Invalid(vec![format!(
                        "{}:{}: bad cache entry: {e}",
                        path.display(),
                        n + 1
                    )])
                })?;
                entries.insert(entry.config, entry.locations);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(!fresh)
            .write(true)
            .truncate(fresh)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(CoverageCache {
            entries,
            path: Some(path),
            file: Some(file),
        })
    }

    pub fn get(&self, key: &str) -> Option<&LocationSet> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, locations: LocationSet) -> Result<()> {
        if let (Some(file), Some(path)) = (self.file.as_mut(), self.path.as_ref()) {
            let line = serde_json::to_string(&CacheLine {
                config: key.clone(),
                locations: locations.clone(),
            })?;
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
            file.flush().map_err(|e| Error::io(path, e))?;
        }
        self.entries.insert(key, locations);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_survive_reopen_and_fresh_clears() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cov.jsonl");
        {
            let mut cache = CoverageCache::open(&path, false).unwrap();
            cache
                .insert("a=1".into(), LocationSet::from(["f.c:1".to_string()]))
                .unwrap();
        }
        let cache = CoverageCache::open(&path, false).unwrap();
        assert_eq!(cache.get("a=1").unwrap().len(), 1);
        drop(cache);
        let cache = CoverageCache::open(&path, true).unwrap();
        assert!(cache.is_empty());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
    }
}
