//! In-memory activation sets and label tables.
//!
//! Instance identity is positional: row `i` of every feed-forward layer is
//! instance `i`. Recurrent activations store every time-step of every
//! instance in one matrix, with instance `i` occupying rows
//! `offsets[i]..offsets[i + 1]`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Feedforward,
    Recurrent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerData {
    pub name: String,
    pub matrix: Matrix,
}

impl LayerData {
    pub fn new(name: impl Into<String>, matrix: Matrix) -> Self {
        Self {
            name: name.into(),
            matrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSet {
    mode: Mode,
    instance_count: usize,
    layers: Vec<LayerData>,
    lengths: Vec<usize>,
    offsets: Vec<usize>,
}

/// Rows holding time-step `t`, one per instance long enough to have it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimeSlice {
    pub rows: Vec<usize>,
    pub instance_ids: Vec<usize>,
}

fn check_matrix(layer: &LayerData) -> Result<()> {
    if layer.matrix.cols() == 0 {
        return Err(Error::invalid(
            "layers",
            format!("layer `{}` has zero columns", layer.name),
        ));
    }
    if let Some((row, col)) = layer.matrix.first_non_finite() {
        return Err(Error::NonFinite {
            what: format!("layer `{}`", layer.name),
            row,
            col,
        });
    }
    Ok(())
}

impl ActivationSet {
    pub fn feedforward(layers: Vec<LayerData>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::invalid("layers", "no included layers"))?;
        let n = first.matrix.rows();
        for layer in &layers {
            if layer.matrix.rows() != n {
                return Err(Error::RowMismatch {
                    what: format!("layer `{}`", layer.name),
                    expected: n,
                    found: layer.matrix.rows(),
                });
            }
            check_matrix(layer)?;
        }
        Ok(Self {
            mode: Mode::Feedforward,
            instance_count: n,
            layers,
            lengths: Vec::new(),
            offsets: Vec::new(),
        })
    }

    /// Builds a recurrent set from the stacked per-step states and the
    /// sequence lengths. Every length must be at least one.
    pub fn recurrent(layer: LayerData, lengths: Vec<usize>) -> Result<Self> {
        check_matrix(&layer)?;
        let offsets = offsets_from_lengths(&lengths)?;
        let total = *offsets.last().unwrap_or(&0);
        if total != layer.matrix.rows() {
            return Err(Error::RowMismatch {
                what: format!("recurrent layer `{}` vs. sum of lengths", layer.name),
                expected: total,
                found: layer.matrix.rows(),
            });
        }
        Ok(Self {
            mode: Mode::Recurrent,
            instance_count: lengths.len(),
            layers: alloc::vec![layer],
            lengths,
            offsets,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn instance_count(&self) -> usize {
        self.instance_count
    }

    pub fn layers(&self) -> &[LayerData] {
        &self.layers
    }

    pub fn instance_ids(&self) -> core::ops::Range<usize> {
        0..self.instance_count
    }

    /// Sequence lengths; empty in feed-forward mode.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Prefix sums of the lengths, `N + 1` entries; empty in feed-forward mode.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn max_length(&self) -> usize {
        self.lengths.iter().copied().max().unwrap_or(0)
    }

    pub fn min_length(&self) -> usize {
        self.lengths.iter().copied().min().unwrap_or(0)
    }

    pub fn time_slice(&self, t: usize) -> Result<TimeSlice> {
        if self.mode != Mode::Recurrent {
            return Err(Error::NotRecurrent);
        }
        let mut slice = TimeSlice::default();
        for (i, &len) in self.lengths.iter().enumerate() {
            if len > t {
                slice.rows.push(self.offsets[i] + t);
                slice.instance_ids.push(i);
            }
        }
        Ok(slice)
    }
}

pub fn offsets_from_lengths(lengths: &[usize]) -> Result<Vec<usize>> {
    let mut offsets = Vec::with_capacity(lengths.len() + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for (i, &len) in lengths.iter().enumerate() {
        if len == 0 {
            return Err(Error::invalid(
                "lengths",
                format!("instance {i} has length 0"),
            ));
        }
        acc += len;
        offsets.push(acc);
    }
    Ok(offsets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    SingleClass,
    MultiLabel,
}

/// Which label column decides an instance's class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassSource {
    #[default]
    Predicted,
    True,
}

/// True and (optionally) predicted labels.
///
/// Single-class tables hold one class index per instance. Multi-label tables
/// hold `class_count` binary entries per instance, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    kind: LabelKind,
    class_names: Vec<String>,
    instance_count: usize,
    truth: Vec<u32>,
    predicted: Option<Vec<u32>>,
}

impl LabelTable {
    pub fn single_class(
        class_names: Vec<String>,
        truth: Vec<u32>,
        predicted: Option<Vec<u32>>,
    ) -> Result<Self> {
        let k = class_names.len();
        if k == 0 {
            return Err(Error::invalid("class_names", "no classes"));
        }
        let n = truth.len();
        for (which, col) in [("labels", Some(&truth)), ("predictions", predicted.as_ref())] {
            let Some(col) = col else { continue };
            if col.len() != n {
                return Err(Error::RowMismatch {
                    what: which.into(),
                    expected: n,
                    found: col.len(),
                });
            }
            if let Some((i, &c)) = col.iter().enumerate().find(|(_, &c)| c as usize >= k) {
                return Err(Error::Label(format!(
                    "{which}: row {i} has class {c}, outside [0, {k})"
                )));
            }
        }
        Ok(Self {
            kind: LabelKind::SingleClass,
            class_names,
            instance_count: n,
            truth,
            predicted,
        })
    }

    /// `truth` and `predicted` are row-major `N × L` binary matrices.
    pub fn multi_label(
        label_names: Vec<String>,
        truth: Vec<u32>,
        predicted: Option<Vec<u32>>,
    ) -> Result<Self> {
        let width = label_names.len();
        if width == 0 {
            return Err(Error::invalid("class_names", "no labels"));
        }
        if !truth.len().is_multiple_of(width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: truth.len() % width,
            });
        }
        let n = truth.len() / width;
        for (which, col) in [("labels", Some(&truth)), ("predictions", predicted.as_ref())] {
            let Some(col) = col else { continue };
            if col.len() != n * width {
                return Err(Error::RowMismatch {
                    what: which.into(),
                    expected: n,
                    found: col.len() / width,
                });
            }
            if let Some(p) = col.iter().position(|&v| v > 1) {
                return Err(Error::Label(format!(
                    "{which}: row {}, label `{}` is {}, expected 0 or 1",
                    p / width,
                    label_names[p % width],
                    col[p]
                )));
            }
        }
        Ok(Self {
            kind: LabelKind::MultiLabel,
            class_names: label_names,
            instance_count: n,
            truth,
            predicted,
        })
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn instance_count(&self) -> usize {
        self.instance_count
    }

    pub fn has_predictions(&self) -> bool {
        self.predicted.is_some()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    fn column(&self, source: ClassSource) -> Result<&[u32]> {
        match source {
            ClassSource::True => Ok(&self.truth),
            ClassSource::Predicted => self
                .predicted
                .as_deref()
                .ok_or_else(|| Error::Label("no predictions were loaded".into())),
        }
    }

    /// Class indices of a single-class table for the given source.
    pub fn classes(&self, source: ClassSource) -> Result<&[u32]> {
        if self.kind != LabelKind::SingleClass {
            return Err(Error::Label("table is multi-label".into()));
        }
        self.column(source)
    }

    /// Column `label` of a multi-label table as a 0/1 vector.
    pub fn label_bits(&self, label: usize, source: ClassSource) -> Result<Vec<u32>> {
        if self.kind != LabelKind::MultiLabel {
            return Err(Error::Label("table is single-class".into()));
        }
        let width = self.class_names.len();
        if label >= width {
            return Err(Error::Label(format!("label index {label} out of range")));
        }
        let col = self.column(source)?;
        Ok((0..self.instance_count).map(|i| col[i * width + label]).collect())
    }
}
