//! Markdown rendering of the path report.

use std::fmt::Write;

use actpath_core::flow::{dominant_class, DominantClass};
use actpath_core::{ActivationSet, Column, LayerClustering, Mode};

use crate::artifacts::{ClustersFile, FlowsFile, PathsFile};
use crate::error::Result;

/// Sample ids listed per cluster.
pub const CLUSTER_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub cluster: usize,
    /// Rows assigned to the cluster (time-steps, for recurrent data).
    pub size: usize,
    pub dominant: Option<DominantClass>,
    /// Lowest distinct instance ids with a row in the cluster.
    pub samples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSummary {
    pub layer: String,
    pub clusters: Vec<ClusterSummary>,
}

/// Per-cluster size, dominant true class and sample instances. `truth`
/// holds one class per instance.
pub fn summarize_clusters(
    layers: &[LayerClustering],
    set: &ActivationSet,
    truth: &[usize],
    class_count: usize,
) -> Result<Vec<LayerSummary>> {
    let row_owner: Vec<usize> = match set.mode() {
        Mode::Feedforward => (0..set.instance_count()).collect(),
        Mode::Recurrent => set
            .lengths()
            .iter()
            .enumerate()
            .flat_map(|(i, &l)| std::iter::repeat_n(i, l))
            .collect(),
    };
    let row_truth: Vec<usize> = row_owner.iter().map(|&i| truth[i]).collect();
    layers
        .iter()
        .map(|layer| {
            let dominant = dominant_class(&layer.assignments, &row_truth, layer.k, class_count)?;
            let mut samples = vec![Vec::new(); layer.k];
            for (row, &a) in layer.assignments.iter().enumerate() {
                let s: &mut Vec<usize> = &mut samples[a];
                let id = row_owner[row];
                if s.len() < CLUSTER_SAMPLES && s.last() != Some(&id) {
                    s.push(id);
                }
            }
            let sizes = layer.cluster_sizes();
            Ok(LayerSummary {
                layer: layer.layer_name.clone(),
                clusters: (0..layer.k)
                    .map(|c| ClusterSummary {
                        cluster: c,
                        size: sizes[c],
                        dominant: dominant[c],
                        samples: std::mem::take(&mut samples[c]),
                    })
                    .collect(),
            })
        })
        .collect()
}

fn ids(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

pub fn render_report(
    clusters: &ClustersFile,
    flows: &FlowsFile,
    paths: &PathsFile,
    summaries: &[LayerSummary],
) -> String {
    let g = &flows.flows;
    let names = &g.class_names;
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", paths.dataset);
    let _ = writeln!(
        s,
        "{} {}, seed {}, {} instances, {} mode.",
        paths.provenance.tool,
        paths.provenance.tool_version,
        paths.provenance.seed,
        clusters.instance_count,
        match clusters.mode {
            Mode::Feedforward => "feed-forward",
            Mode::Recurrent => "recurrent",
        }
    );
    let source = match g.class_source {
        actpath_core::ClassSource::Predicted => "predicted",
        actpath_core::ClassSource::True => "true",
    };
    let _ = write!(s, "Classes are keyed by {source} labels");
    if let Some(f) = &g.filter {
        let _ = write!(s, "; instances filtered by `{f}`");
    }
    if let Some((a, b)) = paths.window {
        let _ = write!(s, "; time-steps {a} to {b}");
    }
    let _ = writeln!(s, ".\n");

    let _ = writeln!(s, "## Decision paths\n");
    let _ = writeln!(
        s,
        "Paths with coverage at least {} over {}.\n",
        paths.thresholds.min_coverage,
        paths.columns.join(" → ")
    );
    let _ = writeln!(s, "| Class | Path | Count | Coverage | Sample ids |");
    let _ = writeln!(s, "|---|---|---:|---:|---|");
    for cp in &paths.classes {
        for p in &cp.paths {
            let seq = p.clusters.iter().map(usize::to_string).collect::<Vec<_>>().join(" → ");
            let shown = &p.sample_instance_ids[..p.sample_instance_ids.len().min(CLUSTER_SAMPLES)];
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {} |",
                cp.name,
                seq,
                p.count,
                p.coverage,
                ids(shown)
            );
        }
        let _ = writeln!(
            s,
            "| {} | total: {} of {} paths | {} | {:.3} | |",
            cp.name,
            cp.paths.len(),
            cp.path_count,
            cp.class_size,
            cp.coverage
        );
    }

    let _ = writeln!(s, "\n## Rare transitions\n");
    let _ = writeln!(
        s,
        "Edges carrying less than {} of their class's flow between two columns.\n",
        paths.thresholds.rare_threshold
    );
    if paths.rare_transitions.is_empty() {
        let _ = writeln!(s, "None.");
    } else {
        let _ = writeln!(
            s,
            "| Columns | From | To | Class | Dominant class | Count | Coverage | Mismatch | Sample ids |"
        );
        let _ = writeln!(s, "|---|---:|---|---|---|---:|---:|---|---|");
        for r in &paths.rare_transitions {
            let pair = &g.pairs[r.pair];
            let col = |i: usize| crate::commands::column_name(&g.plan.columns[i]);
            let to = if r.dst_is_class {
                names[r.dst].clone()
            } else {
                r.dst.to_string()
            };
            let dom = r.src_dominant.map_or("-".to_string(), |d| names[d].clone());
            let mismatch = match r.mismatch {
                Some(true) => "yes",
                Some(false) => "no",
                None => "-",
            };
            let shown = &r.sample_instance_ids[..r.sample_instance_ids.len().min(CLUSTER_SAMPLES)];
            let _ = writeln!(
                s,
                "| {} → {} | {} | {} | {} | {} | {} | {:.4} | {} | {} |",
                col(pair.left),
                col(pair.right),
                r.src,
                to,
                names[r.class],
                dom,
                r.count,
                r.coverage,
                mismatch,
                ids(shown)
            );
        }
    }

    let _ = writeln!(s, "\n## Clusters\n");
    for layer in summaries {
        let _ = writeln!(s, "### {}\n", layer.layer);
        let _ = writeln!(s, "| Cluster | Size | Dominant class | Purity | Sample ids |");
        let _ = writeln!(s, "|---:|---:|---|---:|---|");
        for c in &layer.clusters {
            let (dom, purity) = match c.dominant {
                Some(d) => (names[d.class].clone(), format!("{:.3}", d.purity)),
                None => ("-".into(), "-".into()),
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} |",
                c.cluster,
                c.size,
                dom,
                purity,
                ids(&c.samples)
            );
        }
        let _ = writeln!(s);
    }
    let cols: Vec<String> = g
        .plan
        .columns
        .iter()
        .map(|c| match c {
            Column::Clusters { name, k } => format!("{name} (k={k})"),
            Column::Classes(cc) => format!("class ({} classes)", cc.count),
        })
        .collect();
    let _ = writeln!(s, "Columns: {}.", cols.join(", "));
    s
}
