//! Output-directory lock.
//!
//! Artifact writes are multi-file, so two concurrent runs into one
//! directory could interleave into a manifest that describes another run's
//! fields. A `.beltrami.lock` sentinel created with `create_new` provides
//! mutual exclusion: holding the open succeeds for exactly one process, and
//! the RAII guard removes the file on drop (including error paths). A stale
//! lock after a crash is removed manually; the error message says so.

use crate::Failure;
use std::fs::OpenOptions;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

pub const LOCK_NAME: &str = ".beltrami.lock";

/// RAII guard over an output directory. Created exclusively; dropped on
/// scope exit, removing the sentinel.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, Failure> {
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                // Fixed content: lock files must not make runs distinguishable.
                let _ = writeln!(file, "held by an active beltrami run");
                Ok(DirLock { path })
            }
            Err(err) if err.kind() == ErrorKind::AlreadyExists => Err(Failure::Io(format!(
                "output directory {} is locked by another run ({LOCK_NAME} exists); \
                 remove the file if the owning process is gone",
                dir.display()
            ))),
            Err(err) => Err(Failure::Io(format!(
                "cannot create lock file {}: {err}",
                path.display()
            ))),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
