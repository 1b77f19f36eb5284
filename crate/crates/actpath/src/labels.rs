//! Label, prediction and sequence-length CSV files.
//!
//! Single-class labels use the header `index,label`, where each label is a
//! class name or a class index. Multi-label files use
//! `index,<name_1>,...,<name_L>` with 0/1 entries. The `index` column must
//! count up from 0 in row order.

use std::path::Path;

use actpath_core::{LabelKind, LabelTable};

use crate::error::{Error, Result};

/// Parsed body of one label file.
enum Column {
    Single(Vec<u32>),
    /// Row-major `N × L`, already permuted to `class_names` order.
    Multi(Vec<u32>),
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e))
}

fn check_index(path: &Path, row: usize, field: Option<&str>) -> Result<()> {
    match field.map(str::parse::<usize>) {
        Some(Ok(i)) if i == row => Ok(()),
        _ => Err(Error::parse(
            path,
            format!("row {row}: index column must equal the row position {row}"),
        )),
    }
}

fn read_column(path: &Path, class_names: &[String]) -> Result<(LabelKind, Column)> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::parse(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("index") || header.len() < 2 {
        return Err(Error::parse(path, "header must start with `index` and name at least one column"));
    }
    if header.len() == 2 && header[1] == "label" {
        let mut out = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(path, e))?;
            check_index(path, row, rec.get(0))?;
            let v = rec.get(1).unwrap_or("");
            let class = match class_names.iter().position(|n| n == v) {
                Some(c) => c,
                None => v.parse::<usize>().map_err(|_| {
                    Error::parse(path, format!("row {row}: unknown class {v:?}"))
                })?,
            };
            if class >= class_names.len() {
                return Err(Error::parse(
                    path,
                    format!("row {row}: class index {class} outside [0, {})", class_names.len()),
                ));
            }
            out.push(class as u32);
        }
        return Ok((LabelKind::SingleClass, Column::Single(out)));
    }

    let names = &header[1..];
    if names.len() != class_names.len() {
        return Err(Error::parse(
            path,
            format!("{} label columns, manifest lists {} class names", names.len(), class_names.len()),
        ));
    }
    let order: Vec<usize> = class_names
        .iter()
        .map(|c| {
            names
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::parse(path, format!("no column for label {c:?}")))
        })
        .collect::<Result<_>>()?;
    let mut bits = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        check_index(path, row, rec.get(0))?;
        for (&col, name) in order.iter().zip(class_names) {
            match rec.get(col + 1) {
                Some("0") => bits.push(0),
                Some("1") => bits.push(1),
                other => {
                    return Err(Error::parse(
                        path,
                        format!("row {row}, label {name:?}: expected 0 or 1, found {:?}", other.unwrap_or("")),
                    ))
                }
            }
        }
    }
    Ok((LabelKind::MultiLabel, Column::Multi(bits)))
}

/// Loads true labels and, when given, predictions of the same schema.
pub fn load_labels(
    labels: &Path,
    predictions: Option<&Path>,
    n: usize,
    class_names: &[String],
) -> Result<LabelTable> {
    let (kind, truth) = read_column(labels, class_names)?;
    let predicted = predictions
        .map(|p| {
            let (pk, col) = read_column(p, class_names)?;
            if pk != kind {
                return Err(Error::parse(p, "predictions and labels use different schemas"));
            }
            Ok(col)
        })
        .transpose()?;
    let rows = |c: &Column| match c {
        Column::Single(v) => v.len(),
        Column::Multi(v) => v.len() / class_names.len(),
    };
    for (path, col) in [(labels, Some(&truth)), (predictions.unwrap_or(labels), predicted.as_ref())] {
        if let Some(col) = col {
            if rows(col) != n {
                return Err(Error::parse(
                    path,
                    format!("{} rows, activations have {n} instances", rows(col)),
                ));
            }
        }
    }
    let unwrap = |c: Column| match c {
        Column::Single(v) | Column::Multi(v) => v,
    };
    let names = class_names.to_vec();
    let table = match kind {
        LabelKind::SingleClass => LabelTable::single_class(names, unwrap(truth), predicted.map(unwrap))?,
        LabelKind::MultiLabel => LabelTable::multi_label(names, unwrap(truth), predicted.map(unwrap))?,
    };
    Ok(table)
}

/// Reads `index,length`; every length must be at least 1.
pub fn load_lengths(path: &Path) -> Result<Vec<usize>> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| Error::parse(path, e))?;
    if header.iter().collect::<Vec<_>>() != ["index", "length"] {
        return Err(Error::parse(path, "header must be `index,length`"));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        check_index(path, row, rec.get(0))?;
        let len = rec
            .get(1)
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::parse(path, format!("row {row}: length must be a positive integer")))?;
        out.push(len);
    }
    Ok(out)
}

pub fn write_single_labels(path: &Path, classes: &[usize], class_names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    let io = |e: csv::Error| Error::parse(path, e);
    w.write_record(["index", "label"]).map_err(io)?;
    for (i, &c) in classes.iter().enumerate() {
        w.write_record([i.to_string(), class_names[c].clone()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lengths(path: &Path, lengths: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    let io = |e: csv::Error| Error::parse(path, e);
    w.write_record(["index", "length"]).map_err(io)?;
    for (i, l) in lengths.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
