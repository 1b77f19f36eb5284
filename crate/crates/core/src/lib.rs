//! Explaining trained networks through their hidden activations.
//!
//! Each layer's activation vectors are clustered with restarted k-means, and
//! an instance becomes a sequence of cluster indices ending at its class.
//! From those sequences this crate counts cluster-to-cluster flows between
//! successive layers (or time-steps of a recurrent network), mines per-class
//! decision paths with their coverage, flags rare transitions, and lays the
//! result out as a Sankey diagram.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! restarts and the command-line front end live in the `actpath` crate.

#![no_std]
// NaN-rejecting checks are written as `!(x >= 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod activation;
pub mod error;
pub mod fixture;
pub mod flow;
pub mod kmeans;
pub mod matrix;
pub mod paths;
pub mod rng;
pub mod sankey;
mod sum;

pub use activation::{ActivationSet, LabelKind, LabelTable, LayerData, Mode, TimeSlice};
pub use error::{Error, Result};
pub use flow::{ClassColumn, ClassSource, Column, ColumnPlan, FlowGraph, InstanceClasses};
pub use kmeans::{KMeansParams, LayerClustering};
pub use matrix::Matrix;
pub use paths::{DecisionPath, RareTransition};
pub use rng::SplitMix64;
pub use sankey::{SankeyGraph, SankeyOptions};
pub use sum::pairwise_sum;
