//! Dataset manifest: a JSON file naming the tensor, label and length files
//! of one activation dump. Relative paths resolve against the manifest's
//! own directory.
//!
//! ```json
//! {
//!   "name": "mnist-cnn",
//!   "mode": "feedforward",
//!   "layers": [
//!     {"name": "conv1", "tensor_file": "conv1.npy", "k": 10, "include": false},
//!     {"name": "conv2", "tensor_file": "conv2.npy", "k": 30},
//!     {"name": "dense", "tensor_file": "dense.npy", "k": 15}
//!   ],
//!   "labels_file": "labels.csv",
//!   "predictions_file": "predictions.csv",
//!   "class_names": ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]
//! }
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use actpath_core::Mode;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub name: String,
    pub tensor_file: PathBuf,
    pub k: usize,
    #[serde(default = "yes")]
    pub include: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub mode: Mode,
    pub layers: Vec<LayerSpec>,
    pub labels_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths_file: Option<PathBuf>,
    pub class_names: Vec<String>,
    /// Directory relative paths resolve against; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn included_layers(&self) -> impl Iterator<Item = &LayerSpec> {
        self.layers.iter().filter(|l| l.include)
    }

    pub fn ks(&self) -> Vec<usize> {
        self.included_layers().map(|l| l.k).collect()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks the structural invariants; file existence is checked by
    /// [`load_manifest`].
    pub fn validate(&self) -> Result<()> {
        if self.included_layers().next().is_none() {
            return Err(Error::manifest("layers", "no included layers"));
        }
        let mut seen = HashSet::new();
        for l in &self.layers {
            if !seen.insert(l.name.as_str()) {
                return Err(Error::manifest("layers", format!("duplicate layer name {:?}", l.name)));
            }
            if l.include && l.k == 0 {
                return Err(Error::manifest(format!("layers.{}.k", l.name), "k must be at least 1"));
            }
        }
        if self.class_names.is_empty() {
            return Err(Error::manifest("class_names", "at least one class name is required"));
        }
        let mut names = HashSet::new();
        if let Some(dup) = self.class_names.iter().find(|n| !names.insert(n.as_str())) {
            return Err(Error::manifest("class_names", format!("duplicate class name {dup:?}")));
        }
        match self.mode {
            Mode::Recurrent => {
                if self.layers.len() != 1 {
                    return Err(Error::manifest("layers", "recurrent mode takes exactly one layer"));
                }
                if self.lengths_file.is_none() {
                    return Err(Error::manifest("lengths_file", "recurrent mode requires a lengths file"));
                }
            }
            Mode::Feedforward => {
                if self.lengths_file.is_some() {
                    return Err(Error::manifest("lengths_file", "only valid in recurrent mode"));
                }
            }
        }
        Ok(())
    }

    fn check_files(&self) -> Result<()> {
        let mut files: Vec<(String, &Path)> = self
            .included_layers()
            .map(|l| (format!("layers.{}.tensor_file", l.name), l.tensor_file.as_path()))
            .collect();
        files.push(("labels_file".into(), &self.labels_file));
        if let Some(p) = &self.predictions_file {
            files.push(("predictions_file".into(), p));
        }
        if let Some(p) = &self.lengths_file {
            files.push(("lengths_file".into(), p));
        }
        for (field, p) in files {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(Error::manifest(field, format!("file not found: {}", full.display())));
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Manifest> {
    let mut m: Manifest = serde_json::from_str(text).map_err(|e| Error::manifest("manifest", e.to_string()))?;
    m.base_dir = base_dir.to_path_buf();
    m.validate()?;
    Ok(m)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let m = parse_manifest(&text, &base)?;
    m.check_files()?;
    Ok(m)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
