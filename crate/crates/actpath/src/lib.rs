//! File formats, parallel clustering and the pipeline commands behind the
//! `actpath` binary.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod fixture;
pub mod labels;
pub mod manifest;
pub mod npy;
pub mod parallel;
pub mod report;
pub mod store;

pub use commands::{cmd_cluster, cmd_flows, cmd_mine, cmd_pipeline, cmd_report, cmd_sankey};
pub use config::{RunArgs, RunConfig};
pub use error::{Error, Result};
pub use manifest::{load_manifest, Manifest};
pub use store::{load_activation_set, load_dataset, Dataset};
