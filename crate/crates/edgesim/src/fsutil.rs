//! Small filesystem helpers shared by the artifact writers.

use crate::error::SimError;
use std::path::Path;

/// Write `bytes` to `path` atomically: write a sibling temporary file, then
/// rename it into place. Readers never observe a half-written artifact, and
/// an interrupted run leaves the previous version intact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SimError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir.display().to_string(), e))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| SimError::config(format!("{}: not a file path", path.display())))?;
    let mut tmp = path.to_path_buf();
    tmp.set_file_name(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| SimError::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| SimError::io(path.display().to_string(), e))
}

/// Write `bytes` atomically unless the file already holds exactly them.
/// Keeps regeneration idempotent: an unchanged artifact is never touched.
pub(crate) fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<(), SimError> {
    if let Ok(existing) = std::fs::read(path) {
        if existing == bytes {
            return Ok(());
        }
    }
    write_atomic(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_atomic_creates_parents_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/out.txt");
        write_atomic(&path, b"one").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"one");
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        // No temporary files left behind.
        let leftovers: Vec<_> = std::fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers.len(), 1);
    }
}
