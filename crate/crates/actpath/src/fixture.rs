//! Writes generated datasets in the on-disk layout `load_dataset` reads,
//! plus a `truth.json` sidecar with the planted structure.

use std::fs;
use std::path::{Path, PathBuf};

use actpath_core::fixture::{
    gen_planted, gen_recurrent, FixtureColumn, FixtureSpec, PlantedPath, PlantedTruth,
    RecurrentFixtureSpec, RecurrentTruth,
};
use actpath_core::Mode;
use serde::{Deserialize, Serialize};

use crate::artifacts::write_json;
use crate::error::{Error, Result};
use crate::labels::{write_lengths, write_single_labels};
use crate::manifest::{write_manifest, LayerSpec, Manifest};
use crate::npy::{write_tensor, Dtype};

pub const MANIFEST: &str = "manifest.json";
pub const TRUTH: &str = "truth.json";
pub const LABELS: &str = "labels.csv";
pub const LENGTHS: &str = "lengths.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSidecar {
    pub spec: FixtureSpec,
    pub truth: PlantedTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentSidecar {
    pub spec: RecurrentFixtureSpec,
    pub truth: RecurrentTruth,
}

pub fn class_names(n: usize) -> Vec<String> {
    (0..n).map(|c| format!("class{c}")).collect()
}

/// Three classes, each with a 0.7 and a 0.3 path through two layers of
/// 6 and 4 clusters.
pub fn default_planted(instances: usize, outlier_rate: f64, seed: u64) -> FixtureSpec {
    let path = |a: usize, b: usize, weight: f64| PlantedPath {
        clusters: vec![a, b],
        weight,
    };
    FixtureSpec {
        classes: 3,
        paths: vec![
            vec![path(0, 0, 0.7), path(1, 1, 0.3)],
            vec![path(2, 2, 0.7), path(3, 3, 0.3)],
            vec![path(4, 1, 0.7), path(5, 2, 0.3)],
        ],
        columns: vec![FixtureColumn { k: 6, dim: 8 }, FixtureColumn { k: 4, dim: 8 }],
        separation: 10.0,
        sigma: 1.0,
        instances,
        outlier_rate,
        seed,
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_planted(dir: &Path, spec: &FixtureSpec, name: &str) -> Result<PlantedSidecar> {
    prepare(dir)?;
    let data = gen_planted(spec)?;
    let names = class_names(spec.classes);
    let mut layers = Vec::new();
    for (j, (m, col)) in data.layers.iter().zip(&spec.columns).enumerate() {
        let file = PathBuf::from(format!("layer{j}.npy"));
        write_tensor(&dir.join(&file), m, Dtype::F8)?;
        layers.push(LayerSpec {
            name: format!("layer{j}"),
            tensor_file: file,
            k: col.k,
            include: true,
        });
    }
    write_single_labels(&dir.join(LABELS), &data.truth.classes, &names)?;
    let manifest = Manifest {
        name: name.to_string(),
        mode: Mode::Feedforward,
        layers,
        labels_file: LABELS.into(),
        predictions_file: None,
        lengths_file: None,
        class_names: names,
        base_dir: dir.to_path_buf(),
    };
    write_manifest(&dir.join(MANIFEST), &manifest)?;
    let sidecar = PlantedSidecar {
        spec: spec.clone(),
        truth: data.truth,
    };
    write_json(&dir.join(TRUTH), &sidecar)?;
    Ok(sidecar)
}

pub fn write_recurrent(dir: &Path, spec: &RecurrentFixtureSpec, name: &str) -> Result<RecurrentSidecar> {
    prepare(dir)?;
    let data = gen_recurrent(spec)?;
    let names = class_names(spec.classes);
    let file = PathBuf::from("hidden.npy");
    write_tensor(&dir.join(&file), &data.activations, Dtype::F8)?;
    write_single_labels(&dir.join(LABELS), &data.truth.classes, &names)?;
    write_lengths(&dir.join(LENGTHS), &data.truth.lengths)?;
    let manifest = Manifest {
        name: name.to_string(),
        mode: Mode::Recurrent,
        layers: vec![LayerSpec {
            name: "hidden".into(),
            tensor_file: file,
            k: spec.states,
            include: true,
        }],
        labels_file: LABELS.into(),
        predictions_file: None,
        lengths_file: Some(LENGTHS.into()),
        class_names: names,
        base_dir: dir.to_path_buf(),
    };
    write_manifest(&dir.join(MANIFEST), &manifest)?;
    let sidecar = RecurrentSidecar {
        spec: spec.clone(),
        truth: data.truth,
    };
    write_json(&dir.join(TRUTH), &sidecar)?;
    Ok(sidecar)
}
