use std::path::Path;

use actpath_core::{ActivationSet, LabelTable, LayerData, Mode};

use crate::error::{Error, Result};
use crate::labels::{load_labels, load_lengths};
use crate::manifest::{load_manifest, Manifest};
use crate::npy::read_tensor;

/// Loads every included layer; instances are matched by row position.
pub fn load_activation_set(manifest: &Manifest) -> Result<ActivationSet> {
    let mut layers = Vec::new();
    for spec in manifest.included_layers() {
        let tensor = read_tensor(&manifest.resolve(&spec.tensor_file))?;
        layers.push(LayerData::new(spec.name.clone(), tensor.matrix));
    }
    match manifest.mode {
        Mode::Feedforward => Ok(ActivationSet::feedforward(layers)?),
        Mode::Recurrent => {
            let path = manifest
                .lengths_file
                .as_ref()
                .ok_or_else(|| Error::manifest("lengths_file", "recurrent mode requires a lengths file"))?;
            let lengths = load_lengths(&manifest.resolve(path))?;
            let layer = layers.pop().expect("validated: one layer");
            Ok(ActivationSet::recurrent(layer, lengths)?)
        }
    }
}

/// A manifest with its activations and labels loaded.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: Manifest,
    pub activations: ActivationSet,
    pub labels: LabelTable,
}

pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = load_manifest(manifest_path)?;
    let activations = load_activation_set(&manifest)?;
    let labels = load_labels(
        &manifest.resolve(&manifest.labels_file),
        manifest.predictions_file.as_ref().map(|p| manifest.resolve(p)).as_deref(),
        activations.instance_count(),
        &manifest.class_names,
    )?;
    Ok(Dataset {
        manifest,
        activations,
        labels,
    })
}
