//! Pipeline stages. Each stage reads its inputs from the manifest and from
//! upstream artifacts on disk, so running the stages one by one gives the
//! same files as [`cmd_pipeline`].

use std::path::PathBuf;

use actpath_core::flow::{
    build_flows, filter_instances, recurrent_tracks, tracks_from_clusterings, ClassColumn,
    ColumnPlan, FlowOptions, InstanceClasses, Predicate, Track,
};
use actpath_core::paths::{class_coverage, mine_paths, rare_transitions, top_paths, PathSelection};
use actpath_core::sankey::{build_sankey, emit_html, emit_svg};
use actpath_core::{ActivationSet, ClassSource, LabelKind, LabelTable, Mode};

use crate::artifacts::{
    read_artifact, to_json, write_bytes, write_json, ClassPaths, ClustersFile, DiagramFile,
    FlowsFile, PathsFile, Provenance, Thresholds, CLUSTERS, DIAGRAM_HTML, DIAGRAM_JSON,
    DIAGRAM_SVG, FLOWS, PATHS, REPORT,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::parallel::cluster_layers_parallel;
use crate::report::{render_report, summarize_clusters};
use crate::store::{load_dataset, Dataset};

pub fn cmd_cluster(cfg: &RunConfig) -> Result<PathBuf> {
    let data = load_dataset(&cfg.manifest)?;
    let layers = cluster_layers_parallel(&data.activations, &data.manifest.ks(), &cfg.kmeans, cfg.threads)?;
    let file = ClustersFile {
        provenance: Provenance::new(cfg.kmeans.base_seed),
        dataset: data.manifest.name.clone(),
        mode: data.activations.mode(),
        instance_count: data.activations.instance_count(),
        params: cfg.kmeans,
        layers,
    };
    let path = cfg.out.join(CLUSTERS);
    write_json(&path, &file)?;
    Ok(path)
}

/// Dataset, clustering and the class keying shared by the later stages.
pub struct Context {
    pub data: Dataset,
    pub clusters: ClustersFile,
    pub predicate: Option<Predicate>,
    pub classes: InstanceClasses,
    pub truth: InstanceClasses,
    pub mask: Option<Vec<bool>>,
    pub tracks: Vec<Track>,
    pub plan: ColumnPlan,
}

fn check_clusters(data: &Dataset, clusters: &ClustersFile, path: PathBuf) -> Result<()> {
    let names: Vec<&str> = data.manifest.included_layers().map(|l| l.name.as_str()).collect();
    let found: Vec<&str> = clusters.layers.iter().map(|l| l.layer_name.as_str()).collect();
    let rows: Vec<usize> = data.activations.layers().iter().map(|l| l.matrix.rows()).collect();
    let stale = names != found
        || clusters.mode != data.activations.mode()
        || clusters
            .layers
            .iter()
            .zip(&rows)
            .any(|(l, &r)| l.assignments.len() != r);
    if stale {
        return Err(Error::Artifact {
            path,
            message: "does not match the manifest; rerun `cluster`".into(),
        });
    }
    Ok(())
}

pub fn default_window(set: &ActivationSet) -> (usize, usize) {
    (0, set.min_length().saturating_sub(1).max(1))
}

fn focus_name(labels: &LabelTable, p: &Option<Predicate>) -> Option<usize> {
    p.as_ref().and_then(|p| p.focus_label(labels))
}

impl Context {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let data = load_dataset(&cfg.manifest)?;
        let clusters: ClustersFile = read_artifact(&cfg.out, CLUSTERS)?;
        check_clusters(&data, &clusters, cfg.out.join(CLUSTERS))?;
        let predicate = cfg.filter.as_deref().map(Predicate::parse).transpose()?;
        let focus = focus_name(&data.labels, &predicate);
        let classes = InstanceClasses::resolve(&data.labels, cfg.class_source, focus)?;
        let truth = InstanceClasses::resolve(&data.labels, ClassSource::True, focus)?;
        let mask = predicate
            .as_ref()
            .map(|p| filter_instances(&data.labels, p))
            .transpose()?;
        let (tracks, plan) = match data.activations.mode() {
            Mode::Feedforward => {
                let plan = ColumnPlan::feedforward(
                    &clusters.layers,
                    Some(ClassColumn {
                        count: classes.count(),
                        source: classes.source,
                    }),
                )?;
                (tracks_from_clusterings(&clusters.layers), plan)
            }
            Mode::Recurrent => {
                let window = cfg.window.unwrap_or_else(|| default_window(&data.activations));
                let layer = &clusters.layers[0];
                let tracks = recurrent_tracks(layer, &data.activations, window)?;
                (tracks, ColumnPlan::recurrent(layer.k, window)?)
            }
        };
        Ok(Self {
            data,
            clusters,
            predicate,
            classes,
            truth,
            mask,
            tracks,
            plan,
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(self.clusters.provenance.seed)
    }

    fn focus_label(&self) -> Option<String> {
        if self.data.labels.kind() != LabelKind::MultiLabel {
            return None;
        }
        focus_name(&self.data.labels, &self.predicate).map(|j| self.data.labels.class_names()[j].clone())
    }
}

pub fn cmd_flows(cfg: &RunConfig) -> Result<PathBuf> {
    let ctx = Context::load(cfg)?;
    let options = FlowOptions {
        sample_cap: cfg.sample_cap,
        mask: ctx.mask.clone(),
        filter: ctx.predicate.as_ref().map(Predicate::describe),
    };
    let flows = build_flows(&ctx.tracks, &ctx.plan, &ctx.classes, &ctx.truth, &options)?;
    let file = FlowsFile {
        provenance: ctx.provenance(),
        dataset: ctx.data.manifest.name.clone(),
        focus_label: ctx.focus_label(),
        flows,
    };
    let path = cfg.out.join(FLOWS);
    write_json(&path, &file)?;
    Ok(path)
}

fn load_flows(cfg: &RunConfig, ctx: &Context) -> Result<FlowsFile> {
    let flows: FlowsFile = read_artifact(&cfg.out, FLOWS)?;
    let g = &flows.flows;
    let filter = ctx.predicate.as_ref().map(Predicate::describe);
    if g.plan != ctx.plan || g.filter != filter || g.class_source != ctx.classes.source {
        return Err(Error::Artifact {
            path: cfg.out.join(FLOWS),
            message: "built with a different filter, window or class source; rerun `flows`".into(),
        });
    }
    Ok(flows)
}

pub fn cmd_mine(cfg: &RunConfig) -> Result<PathBuf> {
    let ctx = Context::load(cfg)?;
    let flows = load_flows(cfg, &ctx)?;
    let all = mine_paths(&ctx.tracks, &ctx.classes, ctx.mask.as_deref(), cfg.sample_cap)?;
    let kept = top_paths(&all, PathSelection::MinCoverage(cfg.min_coverage));
    let classes = ctx
        .classes
        .names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mine: Vec<_> = kept.iter().filter(|p| p.class == c).cloned().collect();
            ClassPaths {
                class: c,
                name: name.clone(),
                class_size: all.iter().find(|p| p.class == c).map_or(0, |p| p.class_size),
                path_count: all.iter().filter(|p| p.class == c).count(),
                coverage: class_coverage(&mine, c),
                paths: mine,
            }
        })
        .collect();
    let columns = ctx
        .plan
        .columns
        .iter()
        .filter(|c| !c.is_class())
        .map(column_name)
        .collect();
    let file = PathsFile {
        provenance: ctx.provenance(),
        dataset: ctx.data.manifest.name.clone(),
        class_source: ctx.classes.source,
        filter: flows.flows.filter.clone(),
        window: ctx.plan.window,
        columns,
        thresholds: Thresholds {
            min_coverage: cfg.min_coverage,
            rare_threshold: cfg.rare_threshold,
        },
        classes,
        rare_transitions: rare_transitions(&flows.flows, cfg.rare_threshold),
    };
    let path = cfg.out.join(PATHS);
    write_json(&path, &file)?;
    Ok(path)
}

pub fn column_name(c: &actpath_core::Column) -> String {
    match c {
        actpath_core::Column::Clusters { name, .. } => name.clone(),
        actpath_core::Column::Classes(_) => "class".to_string(),
    }
}

pub fn cmd_sankey(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let ctx = Context::load(cfg)?;
    let flows = load_flows(cfg, &ctx)?;
    let mut options = cfg.sankey.clone();
    options.dim_classes = cfg
        .dim
        .iter()
        .map(|name| {
            flows
                .flows
                .class_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::config("dim", format!("unknown class {name:?}")))
        })
        .collect::<Result<_>>()?;
    if options.title.is_none() {
        options.title = Some(ctx.data.manifest.name.clone());
    }
    let graph = build_sankey(&flows.flows, &options, None)?;
    let out = [
        (DIAGRAM_SVG, emit_svg(&graph)),
        (
            DIAGRAM_JSON,
            to_json(&DiagramFile {
                provenance: ctx.provenance(),
                dataset: ctx.data.manifest.name.clone(),
                graph: graph.clone(),
            }),
        ),
        (DIAGRAM_HTML, emit_html(&graph)),
    ];
    out.into_iter()
        .map(|(name, bytes)| {
            let path = cfg.out.join(name);
            write_bytes(&path, &bytes)?;
            Ok(path)
        })
        .collect()
}

pub fn cmd_report(cfg: &RunConfig) -> Result<PathBuf> {
    let clusters: ClustersFile = read_artifact(&cfg.out, CLUSTERS)?;
    let flows: FlowsFile = read_artifact(&cfg.out, FLOWS)?;
    let paths: PathsFile = read_artifact(&cfg.out, PATHS)?;
    let data = load_dataset(&cfg.manifest)?;
    check_clusters(&data, &clusters, cfg.out.join(CLUSTERS))?;
    let focus = flows
        .focus_label
        .as_deref()
        .and_then(|name| data.labels.class_index(name));
    let truth = InstanceClasses::resolve(&data.labels, ClassSource::True, focus)?;
    let summaries = summarize_clusters(&clusters.layers, &data.activations, &truth.classes, truth.count())?;
    let text = render_report(&clusters, &flows, &paths, &summaries);
    let path = cfg.out.join(REPORT);
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}

/// Runs every stage in order and returns the written files.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = vec![cmd_cluster(cfg)?, cmd_flows(cfg)?, cmd_mine(cfg)?];
    written.extend(cmd_sankey(cfg)?);
    written.push(cmd_report(cfg)?);
    Ok(written)
}
