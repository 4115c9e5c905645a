use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use tempfile::NamedTempFile;

/// Documents stored as `<key>.json` files. Writes go to a temp file in the
/// same directory and are renamed into place, so readers never see partial
/// files. Past `capacity` entries the least recently used files go first.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
    capacity: usize,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>, capacity: usize) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DiskCache { dir, capacity: capacity.max(1) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Cached bytes, marking the entry as recently used.
    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        if let Ok(f) = File::options().write(true).open(&path) {
            let _ = f.set_modified(SystemTime::now());
        }
        Some(bytes)
    }

    pub fn put(&self, key: &str, bytes: &[u8]) -> std::io::Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_data()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        self.evict();
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn entries(&self) -> Vec<(SystemTime, PathBuf)> {
        let Ok(dir) = fs::read_dir(&self.dir) else { return Vec::new() };
        dir.filter_map(Result::ok)
            .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
            .filter_map(|e| Some((e.metadata().ok()?.modified().ok()?, e.path())))
            .collect()
    }

    fn evict(&self) {
        let mut entries = self.entries();
        if entries.len() <= self.capacity {
            return;
        }
        entries.sort();
        let excess = entries.len() - self.capacity;
        for (_, path) in entries.into_iter().take(excess) {
            // Another writer may have removed it already.
            let _ = fs::remove_file(path);
        }
    }
}
