//! Cluster-to-cluster transition counts between successive columns.
//!
//! A column is either a clustered layer (or one time-step of a recurrent
//! network) or the terminal class column. Every instance contributes one
//! unit of flow to each adjacent column pair it is present in, keyed by its
//! class so diagrams can colour flows by class.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use crate::activation::ClassSource;
use crate::activation::{ActivationSet, LabelKind, LabelTable, Mode};
use crate::error::{Error, Result};
use crate::kmeans::LayerClustering;

/// Cluster index of every instance in one column; `None` when the instance
/// has no state there (a recurrent sequence that ended earlier).
pub type Track = Vec<Option<usize>>;

/// Default cap on instance ids kept per edge.
pub const DEFAULT_SAMPLE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassColumn {
    pub count: usize,
    pub source: ClassSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Column {
    Clusters { name: String, k: usize },
    Classes(ClassColumn),
}

impl Column {
    pub fn size(&self) -> usize {
        match self {
            Column::Clusters { k, .. } => *k,
            Column::Classes(c) => c.count,
        }
    }

    pub fn is_class(&self) -> bool {
        matches!(self, Column::Classes(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnPlan {
    pub columns: Vec<Column>,
    /// Inclusive time-step window in recurrent mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
}

impl ColumnPlan {
    /// One column per clustering, optionally followed by the class column.
    pub fn feedforward(clusterings: &[LayerClustering], classes: Option<ClassColumn>) -> Result<Self> {
        let mut columns: Vec<Column> = clusterings
            .iter()
            .map(|c| Column::Clusters {
                name: c.layer_name.clone(),
                k: c.k,
            })
            .collect();
        columns.extend(classes.map(Column::Classes));
        let plan = Self {
            columns,
            window: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// One column per time-step in `[start, end]`, all sharing `k` clusters.
    pub fn recurrent(k: usize, window: (usize, usize)) -> Result<Self> {
        let columns = (window.0..=window.1)
            .map(|t| Column::Clusters {
                name: format!("t{t}"),
                k,
            })
            .collect();
        let plan = Self {
            columns,
            window: Some(window),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.len() < 2 {
            return Err(Error::invalid("plan", "at least two columns are required"));
        }
        if let Some(p) = self.columns.iter().position(Column::is_class) {
            if p != self.columns.len() - 1 {
                return Err(Error::invalid("plan", "the class column must be last"));
            }
        }
        if self.columns.iter().any(|c| c.size() == 0) {
            return Err(Error::invalid("plan", "every column needs at least one node"));
        }
        Ok(())
    }

    pub fn class_column(&self) -> Option<ClassColumn> {
        match self.columns.last() {
            Some(Column::Classes(c)) => Some(*c),
            _ => None,
        }
    }

    pub fn clustered_len(&self) -> usize {
        self.columns.iter().filter(|c| !c.is_class()).count()
    }
}

/// The class every instance is keyed by, with display names.
///
/// For multi-label tables a focus label turns the labels into two classes,
/// "not <label>" and "<label>"; without one every instance falls into a
/// single class named "all".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceClasses {
    pub names: Vec<String>,
    pub classes: Vec<usize>,
    pub source: ClassSource,
}

impl InstanceClasses {
    /// Predicted classes fall back to true classes when no predictions exist.
    pub fn resolve(labels: &LabelTable, source: ClassSource, focus: Option<usize>) -> Result<Self> {
        let source = if source == ClassSource::Predicted && !labels.has_predictions() {
            ClassSource::True
        } else {
            source
        };
        match labels.kind() {
            LabelKind::SingleClass => Ok(Self {
                names: labels.class_names().to_vec(),
                classes: labels.classes(source)?.iter().map(|&c| c as usize).collect(),
                source,
            }),
            LabelKind::MultiLabel => match focus {
                Some(j) => {
                    let name = labels
                        .class_names()
                        .get(j)
                        .ok_or_else(|| Error::Label(format!("label index {j} out of range")))?;
                    Ok(Self {
                        names: vec![format!("not {name}"), name.clone()],
                        classes: labels
                            .label_bits(j, source)?
                            .into_iter()
                            .map(|b| b as usize)
                            .collect(),
                        source,
                    })
                }
                None => Ok(Self {
                    names: vec!["all".to_string()],
                    classes: vec![0; labels.instance_count()],
                    source,
                }),
            },
        }
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Instance filter; see [`Predicate::parse`] for the text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    TrueClass { name: String },
    PredictedClass { name: String },
    Label { name: String, source: ClassSource },
}

impl Predicate {
    /// `class=<name>`, `pred=<name>`, `label=<name>` or `plabel=<name>`
    /// (a multi-label column taken from the predictions).
    pub fn parse(text: &str) -> Result<Self> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| Error::invalid("filter", format!("expected key=value, got `{text}`")))?;
        let name = value.trim().to_string();
        if name.is_empty() {
            return Err(Error::invalid("filter", "empty name"));
        }
        match key.trim() {
            "class" => Ok(Predicate::TrueClass { name }),
            "pred" => Ok(Predicate::PredictedClass { name }),
            "label" => Ok(Predicate::Label {
                name,
                source: ClassSource::True,
            }),
            "plabel" => Ok(Predicate::Label {
                name,
                source: ClassSource::Predicted,
            }),
            other => Err(Error::invalid(
                "filter",
                format!("unknown key `{other}` (expected class, pred, label or plabel)"),
            )),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Predicate::TrueClass { name } => format!("class={name}"),
            Predicate::PredictedClass { name } => format!("pred={name}"),
            Predicate::Label {
                name,
                source: ClassSource::True,
            } => format!("label={name}"),
            Predicate::Label {
                name,
                source: ClassSource::Predicted,
            } => format!("plabel={name}"),
        }
    }

    /// Index of the multi-label column this predicate selects, if any.
    pub fn focus_label(&self, labels: &LabelTable) -> Option<usize> {
        match self {
            Predicate::Label { name, .. } => lookup_class(labels, name).ok(),
            _ => None,
        }
    }
}

fn lookup_class(labels: &LabelTable, name: &str) -> Result<usize> {
    labels
        .class_index(name)
        .or_else(|| name.parse::<usize>().ok().filter(|&i| i < labels.class_count()))
        .ok_or_else(|| Error::Label(format!("unknown label name `{name}`")))
}

pub fn filter_instances(labels: &LabelTable, predicate: &Predicate) -> Result<Vec<bool>> {
    match predicate {
        Predicate::TrueClass { name } | Predicate::PredictedClass { name } => {
            if labels.kind() != LabelKind::SingleClass {
                return Err(Error::Label(format!(
                    "`{}` needs single-class labels; use label=<name>",
                    predicate.describe()
                )));
            }
            let source = if matches!(predicate, Predicate::TrueClass { .. }) {
                ClassSource::True
            } else {
                ClassSource::Predicted
            };
            let c = lookup_class(labels, name)? as u32;
            Ok(labels.classes(source)?.iter().map(|&x| x == c).collect())
        }
        Predicate::Label { name, source } => {
            if labels.kind() != LabelKind::MultiLabel {
                return Err(Error::Label(format!(
                    "`{}` needs multi-label labels",
                    predicate.describe()
                )));
            }
            let j = lookup_class(labels, name)?;
            Ok(labels.label_bits(j, *source)?.iter().map(|&b| b == 1).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantClass {
    pub class: usize,
    /// Fraction of the cluster's instances in `class`.
    pub purity: f64,
    pub size: u64,
}

/// Majority class per cluster; ties go to the lowest class index. Entries
/// are `None` for clusters with no instance.
pub fn dominant_class(
    assignments: &[usize],
    classes: &[usize],
    k: usize,
    class_count: usize,
) -> Result<Vec<Option<DominantClass>>> {
    if assignments.len() != classes.len() {
        return Err(Error::RowMismatch {
            what: "labels vs. assignments".into(),
            expected: assignments.len(),
            found: classes.len(),
        });
    }
    let track: Track = assignments.iter().map(|&a| Some(a)).collect();
    dominant_for_track(&track, classes, k, class_count)
}

fn dominant_for_track(
    track: &[Option<usize>],
    classes: &[usize],
    k: usize,
    class_count: usize,
) -> Result<Vec<Option<DominantClass>>> {
    let mut hist = vec![0u64; k * class_count];
    for (a, &c) in track.iter().zip(classes) {
        let Some(a) = *a else { continue };
        if a >= k || c >= class_count {
            return Err(Error::invalid("assignments", "index out of range"));
        }
        hist[a * class_count + c] += 1;
    }
    Ok(hist
        .chunks(class_count)
        .map(|row| {
            let size: u64 = row.iter().sum();
            if size == 0 {
                return None;
            }
            let mut best = 0;
            for (c, &h) in row.iter().enumerate() {
                if h > row[best] {
                    best = c;
                }
            }
            Some(DominantClass {
                class: best,
                purity: row[best] as f64 / size as f64,
                size,
            })
        })
        .collect())
}

/// One class-keyed edge between adjacent columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub class: usize,
    pub src: usize,
    pub dst: usize,
    pub count: u64,
    /// Lowest instance ids on this edge, at most `sample_cap` of them.
    pub samples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlows {
    pub left: usize,
    pub right: usize,
    /// Sorted by `(src, dst, class)`, counts all positive.
    pub edges: Vec<Edge>,
    /// Flow per class through this pair.
    pub class_totals: Vec<u64>,
}

impl PairFlows {
    pub fn count(&self, class: usize, src: usize, dst: usize) -> u64 {
        self.edges
            .binary_search_by(|e| (e.src, e.dst, e.class).cmp(&(src, dst, class)))
            .map_or(0, |i| self.edges[i].count)
    }

    /// Class-agnostic flows `(src, dst, count)`, sorted by `(src, dst)`.
    pub fn aggregated(&self) -> Vec<(usize, usize, u64)> {
        let mut out: Vec<(usize, usize, u64)> = Vec::new();
        for e in &self.edges {
            match out.last_mut() {
                Some(last) if last.0 == e.src && last.1 == e.dst => last.2 += e.count,
                _ => out.push((e.src, e.dst, e.count)),
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.class_totals.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowGraph {
    pub plan: ColumnPlan,
    pub class_names: Vec<String>,
    pub class_source: ClassSource,
    pub pairs: Vec<PairFlows>,
    /// Instances present at each node, per column (after filtering).
    pub node_totals: Vec<Vec<u64>>,
    /// Majority true class per cluster of each clustered column, computed
    /// over all instances regardless of the filter.
    pub dominant: Vec<Vec<Option<DominantClass>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    pub sample_cap: usize,
}

impl FlowGraph {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn total_flow(&self) -> u64 {
        self.pairs.iter().map(PairFlows::total).sum()
    }

    pub fn dominant_of(&self, column: usize, node: usize) -> Option<DominantClass> {
        self.dominant.get(column)?.get(node).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowOptions {
    pub sample_cap: usize,
    pub mask: Option<Vec<bool>>,
    pub filter: Option<String>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            sample_cap: DEFAULT_SAMPLE_CAP,
            mask: None,
            filter: None,
        }
    }
}

impl FlowOptions {
    pub fn filtered(labels: &LabelTable, predicate: &Predicate) -> Result<Self> {
        Ok(Self {
            mask: Some(filter_instances(labels, predicate)?),
            filter: Some(predicate.describe()),
            ..Self::default()
        })
    }

    fn keeps(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }
}

pub fn tracks_from_clusterings(clusterings: &[LayerClustering]) -> Vec<Track> {
    clusterings
        .iter()
        .map(|c| c.assignments.iter().map(|&a| Some(a)).collect())
        .collect()
}

/// One track per time-step of the window, from a clustering over all rows.
pub fn recurrent_tracks(
    clustering: &LayerClustering,
    set: &ActivationSet,
    window: (usize, usize),
) -> Result<Vec<Track>> {
    check_window(set, window)?;
    if clustering.assignments.len() != set.layers()[0].matrix.rows() {
        return Err(Error::RowMismatch {
            what: "recurrent assignments".into(),
            expected: set.layers()[0].matrix.rows(),
            found: clustering.assignments.len(),
        });
    }
    (window.0..=window.1)
        .map(|t| {
            let slice = set.time_slice(t)?;
            let mut track = vec![None; set.instance_count()];
            for (&row, &id) in slice.rows.iter().zip(&slice.instance_ids) {
                track[id] = Some(clustering.assignments[row]);
            }
            Ok(track)
        })
        .collect()
}

pub fn check_window(set: &ActivationSet, window: (usize, usize)) -> Result<()> {
    if set.mode() != Mode::Recurrent {
        return Err(Error::NotRecurrent);
    }
    let max = set.max_length().saturating_sub(1);
    if window.0 >= window.1 || window.1 > max {
        return Err(Error::Window {
            start: window.0,
            end: window.1,
            max,
        });
    }
    Ok(())
}

fn right_node(
    plan: &ColumnPlan,
    tracks: &[Track],
    classes: &InstanceClasses,
    column: usize,
    i: usize,
) -> Option<usize> {
    if plan.columns[column].is_class() {
        Some(classes.classes[i])
    } else {
        tracks[column][i]
    }
}

fn check_inputs(tracks: &[Track], plan: &ColumnPlan, classes: &InstanceClasses) -> Result<usize> {
    plan.validate()?;
    if tracks.len() != plan.clustered_len() {
        return Err(Error::invalid(
            "plan",
            format!("{} clustered columns but {} tracks", plan.clustered_len(), tracks.len()),
        ));
    }
    let n = classes.len();
    for (t, col) in tracks.iter().zip(&plan.columns) {
        if t.len() != n {
            return Err(Error::RowMismatch {
                what: "assignments vs. labels".into(),
                expected: n,
                found: t.len(),
            });
        }
        if t.iter().flatten().any(|&a| a >= col.size()) {
            return Err(Error::invalid("assignments", "cluster index out of range"));
        }
    }
    if let Some(cc) = plan.class_column() {
        if cc.count != classes.count() {
            return Err(Error::invalid(
                "plan",
                format!("class column has {} nodes, labels have {}", cc.count, classes.count()),
            ));
        }
    }
    if classes.classes.iter().any(|&c| c >= classes.count()) {
        return Err(Error::Label("class index out of range".into()));
    }
    Ok(n)
}

/// Tallies `counts[class][a][b]` for every adjacent column pair.
///
/// `classes` keys each instance's flow (and fills the class column);
/// `truth` supplies the true classes used for per-cluster dominance.
pub fn build_flows(
    tracks: &[Track],
    plan: &ColumnPlan,
    classes: &InstanceClasses,
    truth: &InstanceClasses,
    options: &FlowOptions,
) -> Result<FlowGraph> {
    let n = check_inputs(tracks, plan, classes)?;
    if truth.len() != n {
        return Err(Error::RowMismatch {
            what: "true labels".into(),
            expected: n,
            found: truth.len(),
        });
    }
    if let Some(mask) = &options.mask {
        if mask.len() != n {
            return Err(Error::RowMismatch {
                what: "filter mask".into(),
                expected: n,
                found: mask.len(),
            });
        }
    }
    let class_count = classes.count();
    let mut pairs = Vec::with_capacity(plan.columns.len() - 1);
    for p in 0..plan.columns.len() - 1 {
        let kl = plan.columns[p].size();
        let kr = plan.columns[p + 1].size();
        let mut counts = vec![0u64; class_count * kl * kr];
        let mut samples: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
        let mut class_totals = vec![0u64; class_count];
        for i in 0..n {
            if !options.keeps(i) {
                continue;
            }
            let (Some(a), Some(b)) = (tracks[p][i], right_node(plan, tracks, classes, p + 1, i))
            else {
                continue;
            };
            let c = classes.classes[i];
            counts[(c * kl + a) * kr + b] += 1;
            class_totals[c] += 1;
            let s = samples.entry((a, b, c)).or_default();
            if s.len() < options.sample_cap {
                s.push(i);
            }
        }
        let edges = samples
            .into_iter()
            .map(|((src, dst, class), samples)| Edge {
                class,
                src,
                dst,
                count: counts[(class * kl + src) * kr + dst],
                samples,
            })
            .collect();
        pairs.push(PairFlows {
            left: p,
            right: p + 1,
            edges,
            class_totals,
        });
    }

    let mut node_totals = Vec::with_capacity(plan.columns.len());
    for (col, column) in plan.columns.iter().enumerate() {
        let mut totals = vec![0u64; column.size()];
        for i in 0..n {
            if !options.keeps(i) {
                continue;
            }
            let node = if column.is_class() {
                // Class nodes count the instances that reach them.
                tracks.last().and_then(|t| t[i]).map(|_| classes.classes[i])
            } else {
                tracks[col][i]
            };
            if let Some(node) = node {
                totals[node] += 1;
            }
        }
        node_totals.push(totals);
    }

    let dominant = tracks
        .iter()
        .zip(&plan.columns)
        .map(|(t, col)| dominant_for_track(t, &truth.classes, col.size(), truth.count()))
        .collect::<Result<Vec<_>>>()?;

    Ok(FlowGraph {
        plan: plan.clone(),
        class_names: classes.names.clone(),
        class_source: classes.source,
        pairs,
        node_totals,
        dominant,
        filter: options.filter.clone(),
        sample_cap: options.sample_cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeKey {
    pub pair: usize,
    pub class: usize,
    pub src: usize,
    pub dst: usize,
}

/// Every instance on an edge, by full rescan. Unlike [`Edge::samples`] the
/// list is not capped.
pub fn edge_instances(
    tracks: &[Track],
    plan: &ColumnPlan,
    classes: &InstanceClasses,
    mask: Option<&[bool]>,
    edge: EdgeKey,
) -> Result<Vec<usize>> {
    let EdgeKey { pair, class, src, dst } = edge;
    let n = check_inputs(tracks, plan, classes)?;
    if pair + 1 >= plan.columns.len() {
        return Err(Error::invalid("pair", format!("no column pair {pair}")));
    }
    Ok((0..n)
        .filter(|&i| mask.is_none_or(|m| m[i]))
        .filter(|&i| {
            classes.classes[i] == class
                && tracks[pair][i] == Some(src)
                && right_node(plan, tracks, classes, pair + 1, i) == Some(dst)
        })
        .collect())
}

/// Flows between consecutive time-steps of a window, from one clustering
/// shared by all steps. Pair `(t, t + 1)` counts only instances whose
/// sequences are longer than `t + 1`.
pub fn recurrent_flows(
    clustering: &LayerClustering,
    set: &ActivationSet,
    classes: &InstanceClasses,
    truth: &InstanceClasses,
    window: (usize, usize),
    options: &FlowOptions,
) -> Result<FlowGraph> {
    let tracks = recurrent_tracks(clustering, set, window)?;
    let plan = ColumnPlan::recurrent(clustering.k, window)?;
    build_flows(&tracks, &plan, classes, truth, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::activation::LayerData;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| i.to_string()).collect()
    }

    fn classes(cs: &[usize], k: usize) -> InstanceClasses {
        InstanceClasses {
            names: names(k),
            classes: cs.to_vec(),
            source: ClassSource::True,
        }
    }

    fn track(a: &[usize]) -> Track {
        a.iter().map(|&x| Some(x)).collect()
    }

    fn plan(ks: &[usize], class_count: Option<usize>) -> ColumnPlan {
        let mut columns: Vec<Column> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| Column::Clusters {
                name: format!("l{i}"),
                k,
            })
            .collect();
        if let Some(c) = class_count {
            columns.push(Column::Classes(ClassColumn {
                count: c,
                source: ClassSource::True,
            }));
        }
        ColumnPlan {
            columns,
            window: None,
        }
    }

    #[test]
    fn single_cluster_single_class() {
        let n = 17;
        let t = track(&vec![0; n]);
        let cl = classes(&vec![0; n], 1);
        let g = build_flows(&[t.clone(), t], &plan(&[1, 1], None), &cl, &cl, &FlowOptions::default())
            .unwrap();
        assert_eq!(g.pairs[0].count(0, 0, 0), n as u64);
    }

    #[test]
    fn hand_counted_flow_matrix() {
        let cl = classes(&[0, 0, 0, 0], 1);
        let g = build_flows(
            &[track(&[0, 0, 1, 1]), track(&[0, 1, 1, 1])],
            &plan(&[2, 2], None),
            &cl,
            &cl,
            &FlowOptions::default(),
        )
        .unwrap();
        let p = &g.pairs[0];
        let m: Vec<Vec<u64>> = (0..2).map(|a| (0..2).map(|b| p.count(0, a, b)).collect()).collect();
        assert_eq!(m, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(p.edges[0].samples, vec![0]);
        assert_eq!(p.edges.iter().find(|e| e.src == 1).unwrap().samples, vec![2, 3]);
    }

    #[test]
    fn class_column_receives_terminal_class() {
        let cl = classes(&[2, 0, 2, 1], 3);
        let g = build_flows(
            &[track(&[0, 1, 0, 1])],
            &plan(&[2], Some(3)),
            &cl,
            &cl,
            &FlowOptions::default(),
        )
        .unwrap();
        assert_eq!(g.pairs[0].count(2, 0, 2), 2);
        assert_eq!(g.pairs[0].count(1, 1, 1), 1);
        assert_eq!(g.node_totals[1], vec![1, 1, 2]);
    }

    #[test]
    fn sample_cap_keeps_lowest_ids() {
        let n = 10;
        let cl = classes(&vec![0; n], 1);
        let t = track(&vec![0; n]);
        let opts = FlowOptions {
            sample_cap: 3,
            ..Default::default()
        };
        let g = build_flows(&[t.clone(), t.clone()], &plan(&[1, 1], None), &cl, &cl, &opts).unwrap();
        assert_eq!(g.pairs[0].edges[0].samples, vec![0, 1, 2]);
        let key = EdgeKey {
            pair: 0,
            class: 0,
            src: 0,
            dst: 0,
        };
        let all = edge_instances(&[t.clone(), t], &plan(&[1, 1], None), &cl, None, key).unwrap();
        assert_eq!(all.len(), n);
    }

    #[test]
    fn misaligned_inputs_error() {
        let cl = classes(&[0, 0, 0], 1);
        let r = build_flows(
            &[track(&[0, 0]), track(&[0, 0])],
            &plan(&[1, 1], None),
            &cl,
            &cl,
            &FlowOptions::default(),
        );
        assert!(matches!(r, Err(Error::RowMismatch { .. })));
    }

    #[test]
    fn plan_rules() {
        assert!(plan(&[3], None).validate().is_err());
        let mut p = plan(&[3, 2], Some(2));
        p.columns.swap(1, 2);
        assert!(p.validate().is_err());
    }

    #[test]
    fn filter_predicates() {
        let labels =
            LabelTable::single_class(names(3), alloc::vec![0, 1, 0, 2], None).unwrap();
        let mask = filter_instances(&labels, &Predicate::parse("class=0").unwrap()).unwrap();
        assert_eq!(mask, vec![true, false, true, false]);
        assert!(filter_instances(&labels, &Predicate::parse("pred=0").unwrap()).is_err());
        assert!(filter_instances(&labels, &Predicate::parse("class=7").unwrap()).is_err());
        assert!(filter_instances(&labels, &Predicate::parse("label=0").unwrap()).is_err());

        let multi = LabelTable::multi_label(
            alloc::vec!["hat".into(), "rosy_cheeks".into()],
            alloc::vec![1, 0, 0, 1, 1, 1],
            None,
        )
        .unwrap();
        let mask = filter_instances(&multi, &Predicate::parse("label=hat").unwrap()).unwrap();
        assert_eq!(mask, vec![true, false, true]);
        assert!(filter_instances(&multi, &Predicate::parse("label=beard").unwrap()).is_err());
        assert!(filter_instances(&multi, &Predicate::parse("class=hat").unwrap()).is_err());
        assert!(Predicate::parse("colour=red").is_err());
        assert!(Predicate::parse("class").is_err());
    }

    #[test]
    fn dominant_class_majority_and_ties() {
        let d = dominant_class(&[0, 0, 0, 0], &[6, 6, 6, 0], 1, 10).unwrap();
        assert_eq!(d[0].unwrap().class, 6);
        assert_eq!(d[0].unwrap().purity, 0.75);
        let d = dominant_class(&[0, 0, 1], &[3, 1, 2], 3, 4).unwrap();
        assert_eq!(d[0].unwrap().class, 1);
        assert!(d[2].is_none());
    }

    #[test]
    fn predicted_source_falls_back_to_truth() {
        let labels = LabelTable::single_class(names(2), alloc::vec![0, 1], None).unwrap();
        let c = InstanceClasses::resolve(&labels, ClassSource::Predicted, None).unwrap();
        assert_eq!(c.source, ClassSource::True);
        let labels =
            LabelTable::single_class(names(2), alloc::vec![0, 1], Some(alloc::vec![1, 1])).unwrap();
        let c = InstanceClasses::resolve(&labels, ClassSource::Predicted, None).unwrap();
        assert_eq!(c.classes, vec![1, 1]);
    }

    #[test]
    fn recurrent_pairs_drop_finished_sequences() {
        let set = ActivationSet::recurrent(
            LayerData::new("gru", Matrix::zeros(12, 1)),
            alloc::vec![3, 5, 4],
        )
        .unwrap();
        let clustering = LayerClustering {
            layer_name: "gru".into(),
            k: 2,
            centroids: Matrix::zeros(2, 1),
            assignments: (0..12).map(|r| r % 2).collect(),
            inertia: 0.0,
            seed: 0,
            chosen_restart: 0,
            iterations_run: 0,
        };
        let cl = classes(&[0, 1, 0], 2);
        let g = recurrent_flows(&clustering, &set, &cl, &cl, (0, 4), &FlowOptions::default()).unwrap();
        let totals: Vec<u64> = g.pairs.iter().map(PairFlows::total).collect();
        // pair (t, t+1) keeps instances with length > t + 1
        assert_eq!(totals, vec![3, 3, 2, 1]);
        assert!(matches!(
            recurrent_flows(&clustering, &set, &cl, &cl, (0, 5), &FlowOptions::default()),
            Err(Error::Window { .. })
        ));
    }
}
