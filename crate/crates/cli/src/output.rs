//! Artifact writing. Files are written into a hidden staging directory next
//! to the target and moved into place only when every file is complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tempfile::TempDir;

use crate::config::CliError;

pub const TOOL: &str = "cfbounds";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(what: &str, path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot {what} {}: {e}", path.display()))
}

pub struct Artifacts {
    target: PathBuf,
    staging: TempDir,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(target: &Path) -> Result<Self, CliError> {
        if target.exists() && !target.is_dir() {
            return Err(CliError::Runtime(format!(
                "output path {} exists and is not a directory",
                target.display()
            )));
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| io_err("create", &parent, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".cfbounds-staging-")
            .tempdir_in(&parent)
            .map_err(|e| io_err("write to", &parent, e))?;
        Ok(Artifacts {
            target: target.to_path_buf(),
            staging,
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.staging.path().join(name)
    }

    /// Pretty JSON with keys in sorted order.
    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let value: Value =
            serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut text =
            serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| io_err("write", &path, e))
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err("write", &path, e))?;
        w.write_record(header)
            .map_err(|e| io_err("write", &path, e))?;
        for row in rows {
            w.write_record(&row)
                .map_err(|e| io_err("write", &path, e))?;
        }
        w.flush().map_err(|e| io_err("write", &path, e))
    }

    /// Raw bytes produced by a library writer.
    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, data).map_err(|e| io_err("write", &path, e))
    }

    /// Writes `manifest.json` and moves everything into the target directory.
    pub fn commit(
        mut self,
        command: &str,
        seed: u64,
        config: &impl Serialize,
    ) -> Result<PathBuf, CliError> {
        let mut files = self.written.clone();
        files.sort();
        let manifest = serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "command": command,
            "seed": seed,
            "config": config,
            "artifacts": files,
        });
        self.json("manifest.json", &manifest)?;
        let staged = self.staging.path().to_path_buf();
        if !self.target.exists() {
            let kept = self.staging.keep();
            fs::rename(&kept, &self.target).map_err(|e| {
                let _ = fs::remove_dir_all(&kept);
                io_err("create", &self.target, e)
            })?;
        } else {
            for name in &self.written {
                let dest = self.target.join(name);
                fs::rename(staged.join(name), &dest).map_err(|e| io_err("write", &dest, e))?;
            }
        }
        Ok(self.target)
    }
}

/// Header shared by every JSON artifact.
pub fn provenance(
    command: &str,
    seed: u64,
    config: &impl Serialize,
) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), TOOL.into());
    m.insert("version".into(), VERSION.into());
    m.insert("command".into(), command.into());
    m.insert("seed".into(), seed.into());
    m.insert(
        "config".into(),
        serde_json::to_value(config).expect("serializable"),
    );
    m
}
