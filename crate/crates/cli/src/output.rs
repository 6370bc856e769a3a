//! Output directories appear complete or not at all: files go to a hidden
//! sibling directory that is renamed into place once the manifest is written.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.txt";

pub struct OutputDir {
    staging: PathBuf,
    target: PathBuf,
    committed: std::cell::Cell<bool>,
}

impl OutputDir {
    /// Refuses to replace an existing directory unless it holds a previous
    /// run's manifest.
    pub fn begin(target: &Path) -> io::Result<Self> {
        if target.exists() {
            let empty = target.is_dir() && fs::read_dir(target)?.next().is_none();
            if !empty && !target.join(MANIFEST).is_file() {
                return Err(io::Error::new(
                    io::ErrorKind::AlreadyExists,
                    "exists and is not a previous run's output",
                ));
            }
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let staging = tempfile::Builder::new().prefix(".avdl-staging-").tempdir_in(&parent)?.keep();
        Ok(OutputDir {
            staging,
            target: target.to_path_buf(),
            committed: std::cell::Cell::new(false),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.staging.join(name), contents)
    }

    pub fn commit(&self, manifest: &str) -> io::Result<()> {
        self.write(MANIFEST, manifest)?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target)?;
        }
        fs::rename(&self.staging, &self.target)?;
        self.committed.set(true);
        Ok(())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.committed.get() {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
