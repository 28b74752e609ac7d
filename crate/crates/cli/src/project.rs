use std::fs;
use std::path::{Path, PathBuf};

use textarium_core::{Document, Fingerprint};

use crate::config::{self, Config};

/// An initialized project directory and its parsed configuration.
pub struct Project {
    pub root: PathBuf,
    pub config: Config,
}

/// `TEXTARIUM_ROOT` if set, otherwise the working directory.
pub fn root_dir() -> PathBuf {
    match std::env::var_os("TEXTARIUM_ROOT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("."),
    }
}

impl Project {
    pub fn open(root: &Path) -> Result<Project, String> {
        let path = root.join(config::FILE_NAME);
        let text =
            fs::read_to_string(&path).map_err(|e| format!("{}: {e} (run `textarium init` first)", path.display()))?;
        let config = Config::parse(&text).map_err(|e| format!("{}: {e}", root.display()))?;
        Ok(Project { root: root.to_path_buf(), config })
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join(config::FILE_NAME)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.root.join(&self.config.out)
    }

    pub fn essay_path(&self) -> PathBuf {
        self.root.join(&self.config.essay)
    }

    /// Loads every registered source text, in config order.
    pub fn documents(&self) -> Result<Vec<Document>, String> {
        self.config.sources.iter().map(|rel| load_document(&self.root.join(rel))).collect()
    }

    pub fn document(&self, fingerprint: Fingerprint) -> Result<Option<Document>, String> {
        Ok(self.documents()?.into_iter().find(|d| d.fingerprint() == fingerprint))
    }
}

/// Reads a UTF-8 text file; the title is the file name without extension.
pub fn load_document(path: &Path) -> Result<Document, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let title = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Document::from_bytes(title, &bytes).map_err(|e| format!("{}: not UTF-8 text ({e})", path.display()))
}
