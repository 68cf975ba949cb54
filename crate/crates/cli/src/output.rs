//! Output directory with atomic file writes and decimal formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use roadcalc::ctm_sim::decimal;
use roadcalc::{Value, Q};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Self {
        OutDir {
            root: root.to_path_buf(),
        }
    }

    /// Writes through a sibling temp file and renames it into place.
    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(&self.root).map_err(io(&self.root))?;
        let target = self.root.join(name);
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(io(&self.root))?;
        tmp.write_all(contents.as_bytes()).map_err(io(tmp.path()))?;
        tmp.persist(&target).map_err(|e| CliError::Io {
            path: target.clone(),
            source: e.error,
        })?;
        Ok(target)
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut text =
            serde_json::to_string_pretty(value).expect("output records always serialize");
        text.push('\n');
        self.write(name, &text)
    }
}

/// Decimal rendering for CSV cells; `inf` for an infinite value.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Finite(x) => decimal(x),
        Value::Infinite => "inf".to_string(),
    }
}

pub fn cell_q(x: &Q) -> String {
    decimal(x)
}

/// `1/6` becomes `1_6`, safe inside a file name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}
