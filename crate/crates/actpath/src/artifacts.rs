//! JSON artifacts written under the output directory. Every file carries
//! the clustering seed and the tool version.

use std::fs;
use std::path::{Path, PathBuf};

use actpath_core::paths::{DecisionPath, RareTransition};
use actpath_core::{ClassSource, FlowGraph, KMeansParams, LayerClustering, Mode, SankeyGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL: &str = "actpath";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CLUSTERS: &str = "clusters.json";
pub const FLOWS: &str = "flows.json";
pub const PATHS: &str = "paths.json";
pub const DIAGRAM_SVG: &str = "diagram.svg";
pub const DIAGRAM_JSON: &str = "diagram.json";
pub const DIAGRAM_HTML: &str = "diagram.html";
pub const REPORT: &str = "report.md";

/// Every artifact, in the order the pipeline writes them.
pub const ALL: [&str; 7] = [CLUSTERS, FLOWS, PATHS, DIAGRAM_SVG, DIAGRAM_JSON, DIAGRAM_HTML, REPORT];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Self {
            tool: TOOL.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub dataset: String,
    pub mode: Mode,
    pub instance_count: usize,
    pub params: KMeansParams,
    pub layers: Vec<LayerClustering>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowsFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub dataset: String,
    /// Multi-label column the classes were keyed by, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_label: Option<String>,
    pub flows: FlowGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_coverage: f64,
    pub rare_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPaths {
    pub class: usize,
    pub name: String,
    /// Instances of the class with a complete sequence.
    pub class_size: u64,
    /// Distinct paths before thresholding.
    pub path_count: usize,
    /// Combined coverage of the listed paths.
    pub coverage: f64,
    pub paths: Vec<DecisionPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub dataset: String,
    pub class_source: ClassSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
    pub columns: Vec<String>,
    pub thresholds: Thresholds,
    pub classes: Vec<ClassPaths>,
    pub rare_transitions: Vec<RareTransition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub dataset: String,
    pub graph: SankeyGraph,
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    bytes
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, &to_json(value))
}

/// Reads an upstream artifact; a missing file is reported as such.
pub fn read_artifact<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path: PathBuf = dir.join(name);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingArtifact(path)),
        Err(e) => return Err(Error::io(path, e)),
    };
    serde_json::from_slice(&bytes).map_err(|e| Error::Artifact {
        path,
        message: e.to_string(),
    })
}
