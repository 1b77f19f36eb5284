//! Run configuration: command-line flags over an optional JSON config
//! file over built-in defaults.
//!
//! The config file mirrors the long flag names with underscores:
//!
//! ```json
//! {
//!   "manifest": "data/manifest.json",
//!   "out": "runs/mnist",
//!   "seed": 7,
//!   "restarts": 10,
//!   "filter": "pred=3",
//!   "min_coverage": 0.05,
//!   "rare_threshold": 0.01,
//!   "sankey": {"width": 1200, "dim": ["0", "1"]}
//! }
//! ```
//!
//! Relative paths in a config file resolve against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use actpath_core::{ClassSource, KMeansParams, SankeyOptions};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MIN_COVERAGE: f64 = 0.05;
pub const DEFAULT_RARE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Predicted,
    True,
}

impl From<SourceArg> for ClassSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Predicted => ClassSource::Predicted,
            SourceArg::True => ClassSource::True,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SankeyFile {
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub margin: Option<f64>,
    pub node_width: Option<f64>,
    pub node_padding: Option<f64>,
    pub min_link_width: Option<f64>,
    pub thin_coverage: Option<f64>,
    pub sweeps: Option<usize>,
    pub title: Option<String>,
    pub dim: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub threads: Option<usize>,
    pub filter: Option<String>,
    pub class_source: Option<SourceArg>,
    pub min_coverage: Option<f64>,
    pub rare_threshold: Option<f64>,
    pub window: Option<String>,
    pub sample_cap: Option<usize>,
    #[serde(default)]
    pub sankey: SankeyFile,
}

/// Flags shared by every analysis command.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Dataset manifest (JSON).
    #[arg(long, short = 'm')]
    pub manifest: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed for all randomness [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// k-means restarts per layer [default: 10].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Lloyd iteration cap [default: 300].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop when inertia improves by less than this fraction [default: 1e-6].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Worker threads for clustering; 0 uses all cores [default: 0].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Keep only matching instances: class=<name> (true class), pred=<name>
    /// (predicted class), label=<name> (multi-label column, true labels) or
    /// plabel=<name> (multi-label column, predicted labels).
    #[arg(long)]
    pub filter: Option<String>,
    /// Labels that key flows and paths [default: predicted, falling back to
    /// true labels when no predictions exist].
    #[arg(long, value_enum)]
    pub class_source: Option<SourceArg>,
    /// Paths below this coverage are left out of the report [default: 0.05].
    #[arg(long)]
    pub min_coverage: Option<f64>,
    /// Transitions below this coverage are reported as rare [default: 0.01].
    #[arg(long)]
    pub rare_threshold: Option<f64>,
    /// Time-step window t0:t1 for recurrent data [default: 0:(shortest length - 1)].
    #[arg(long)]
    pub window: Option<String>,
    /// Instance ids kept per edge and path [default: 64].
    #[arg(long)]
    pub sample_cap: Option<usize>,
    /// Diagram width in pixels [default: 960].
    #[arg(long)]
    pub width: Option<f64>,
    /// Diagram height in pixels [default: 600].
    #[arg(long)]
    pub height: Option<f64>,
    /// Links below this coverage are drawn at minimum width [default: 0].
    #[arg(long)]
    pub thin_coverage: Option<f64>,
    /// Class to draw faded; repeat for several.
    #[arg(long = "dim", value_name = "CLASS")]
    pub dim: Vec<String>,
    /// Diagram title.
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub kmeans: KMeansParams,
    pub threads: usize,
    pub filter: Option<String>,
    pub class_source: ClassSource,
    pub min_coverage: f64,
    pub rare_threshold: f64,
    pub window: Option<(usize, usize)>,
    pub sample_cap: usize,
    pub sankey: SankeyOptions,
    /// Class names to dim, resolved against the labels at render time.
    pub dim: Vec<String>,
}

pub fn parse_window(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::config("window", format!("expected t0:t1, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    if a >= b {
        return Err(Error::config("window", "t0 must be below t1"));
    }
    Ok((a, b))
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.manifest, &mut cfg.out].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => load_config_file(p)?,
            None => ConfigFile::default(),
        };
        self.merge(file)
    }

    pub fn merge(&self, file: ConfigFile) -> Result<RunConfig> {
        let manifest = self
            .manifest
            .clone()
            .or(file.manifest)
            .ok_or_else(|| Error::config("manifest", "a manifest path is required"))?;
        let out = self
            .out
            .clone()
            .or(file.out)
            .ok_or_else(|| Error::config("out", "an output directory is required"))?;
        let defaults = KMeansParams::default();
        let kmeans = KMeansParams {
            restarts: self.restarts.or(file.restarts).unwrap_or(defaults.restarts),
            max_iters: self.max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
            rel_tol: self.rel_tol.or(file.rel_tol).unwrap_or(defaults.rel_tol),
            base_seed: self.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        };
        let window = match self.window.as_deref().or(file.window.as_deref()) {
            Some(w) => Some(parse_window(w)?),
            None => None,
        };
        let s = file.sankey;
        let d = SankeyOptions::default();
        let sankey = SankeyOptions {
            width: self.width.or(s.width).unwrap_or(d.width),
            height: self.height.or(s.height).unwrap_or(d.height),
            margin: s.margin.unwrap_or(d.margin),
            node_width: s.node_width.unwrap_or(d.node_width),
            node_padding: s.node_padding.unwrap_or(d.node_padding),
            min_link_width: s.min_link_width.unwrap_or(d.min_link_width),
            min_coverage: self.thin_coverage.or(s.thin_coverage).unwrap_or(d.min_coverage),
            sweeps: s.sweeps.unwrap_or(d.sweeps),
            title: self.title.clone().or(s.title),
            ..d
        };
        let cfg = RunConfig {
            manifest,
            out,
            kmeans,
            threads: self.threads.or(file.threads).unwrap_or(0),
            filter: self.filter.clone().or(file.filter),
            class_source: self
                .class_source
                .or(file.class_source)
                .map_or(ClassSource::Predicted, Into::into),
            min_coverage: self.min_coverage.or(file.min_coverage).unwrap_or(DEFAULT_MIN_COVERAGE),
            rare_threshold: self
                .rare_threshold
                .or(file.rare_threshold)
                .unwrap_or(DEFAULT_RARE_THRESHOLD),
            window,
            sample_cap: self
                .sample_cap
                .or(file.sample_cap)
                .unwrap_or(actpath_core::flow::DEFAULT_SAMPLE_CAP),
            sankey,
            dim: if self.dim.is_empty() {
                s.dim.unwrap_or_default()
            } else {
                self.dim.clone()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("min_coverage", self.min_coverage),
            ("rare_threshold", self.rare_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("{v} is outside [0, 1]")));
            }
        }
        self.kmeans.validate()?;
        self.sankey.validate()?;
        if let Some(f) = &self.filter {
            actpath_core::flow::Predicate::parse(f)?;
        }
        Ok(())
    }
}
