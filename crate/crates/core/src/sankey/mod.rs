//! Layered Sankey layout of a [`FlowGraph`].
//!
//! Columns are spread evenly across the canvas. Each column has its own
//! vertical scale so that its nodes plus padding fill the drawable height,
//! which keeps heavily filtered diagrams legible. Within a node, outgoing
//! ribbons stack in the order of their destination (then class) and
//! incoming ribbons in the order of their source (then class), so ribbon
//! ends tile the node exactly.

mod emit;
mod order;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use emit::{emit_html, emit_json, emit_svg, parse_json};
pub use order::{crossing_count, index_order, order_nodes};

use crate::error::{Error, Result};
use crate::flow::{Column, FlowGraph};

/// Ten-colour categorical palette, cycled for more classes.
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyOptions {
    pub width: f64,
    pub height: f64,
    /// Blank border around the drawing, in pixels.
    pub margin: f64,
    pub node_width: f64,
    pub node_padding: f64,
    pub min_link_width: f64,
    pub link_opacity: f64,
    /// Opacity multiplier for dimmed classes.
    pub dim_factor: f64,
    pub dim_classes: Vec<usize>,
    /// Links of lower coverage are drawn at `min_link_width` and flagged thin.
    pub min_coverage: f64,
    pub sweeps: usize,
    pub title: Option<String>,
}

impl Default for SankeyOptions {
    fn default() -> Self {
        Self {
            width: 960.0,
            height: 600.0,
            margin: 40.0,
            node_width: 14.0,
            node_padding: 8.0,
            min_link_width: 0.75,
            link_opacity: 0.6,
            dim_factor: 0.15,
            dim_classes: Vec::new(),
            min_coverage: 0.0,
            sweeps: 4,
            title: None,
        }
    }
}

impl SankeyOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("width", self.width),
            ("height", self.height),
            ("node_width", self.node_width),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(field, "must be positive"));
            }
        }
        if !(self.margin >= 0.0) || !(self.node_padding >= 0.0) || !(self.min_link_width >= 0.0) {
            return Err(Error::invalid("canvas", "margin, padding and widths must be >= 0"));
        }
        if self.height <= 2.0 * self.margin || self.width <= 2.0 * self.margin + self.node_width {
            return Err(Error::invalid("canvas", "margins leave no room to draw"));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(Error::invalid("min_coverage", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyNode {
    pub id: usize,
    pub column: usize,
    /// Cluster index, or class index in the class column.
    pub index: usize,
    pub label: String,
    pub size: u64,
    pub x: f64,
    pub y0: f64,
    pub height: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub source: usize,
    pub target: usize,
    pub pair: usize,
    pub class: usize,
    pub count: u64,
    pub coverage: f64,
    /// `[top, bottom]` of the ribbon end on the source node.
    pub source_y: [f64; 2],
    pub target_y: [f64; 2],
    pub color: String,
    pub opacity: f64,
    pub thin: bool,
}

impl SankeyLink {
    pub fn source_width(&self) -> f64 {
        self.source_y[1] - self.source_y[0]
    }

    pub fn target_width(&self) -> f64 {
        self.target_y[1] - self.target_y[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub column_x: Vec<f64>,
    pub column_names: Vec<String>,
    /// Pixels per unit of flow, per column.
    pub scales: Vec<f64>,
    pub node_width: f64,
    pub node_padding: f64,
    pub min_link_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub class: usize,
    pub name: String,
    pub color: String,
    pub dimmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SankeyGraph {
    pub title: Option<String>,
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
    pub canvas: Canvas,
    pub legend: Vec<LegendEntry>,
}

pub fn class_color(class: usize) -> &'static str {
    PALETTE[class % PALETTE.len()]
}

const NODE_GREY: &str = "#5f6b76";

/// Lays out `flows`. Node order comes from `orders` when given, otherwise
/// from [`order_nodes`] with `options.sweeps`.
pub fn build_sankey(
    flows: &FlowGraph,
    options: &SankeyOptions,
    orders: Option<&[Vec<usize>]>,
) -> Result<SankeyGraph> {
    options.validate()?;
    if flows.total_flow() == 0 {
        return Err(Error::EmptyFlow);
    }
    let computed;
    let orders = match orders {
        Some(o) => o,
        None => {
            computed = order_nodes(flows, options.sweeps);
            &computed
        }
    };
    let columns = &flows.plan.columns;
    if orders.len() != columns.len()
        || orders.iter().zip(columns).any(|(o, c)| o.len() != c.size())
    {
        return Err(Error::invalid("orders", "one permutation per column is required"));
    }

    // Node sizes: the larger of inflow and outflow.
    let mut inflow: Vec<Vec<u64>> = columns.iter().map(|c| vec![0; c.size()]).collect();
    let mut outflow = inflow.clone();
    for pair in &flows.pairs {
        for e in &pair.edges {
            outflow[pair.left][e.src] += e.count;
            inflow[pair.right][e.dst] += e.count;
        }
    }

    let n_cols = columns.len();
    let drawable = options.height - 2.0 * options.margin;
    let step = (options.width - 2.0 * options.margin - options.node_width) / (n_cols - 1) as f64;
    let column_x: Vec<f64> = (0..n_cols).map(|c| options.margin + step * c as f64).collect();

    let mut nodes = Vec::new();
    let mut node_id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut scales = Vec::with_capacity(n_cols);
    for (c, column) in columns.iter().enumerate() {
        let visible: Vec<(usize, u64)> = orders[c]
            .iter()
            .map(|&node| (node, inflow[c][node].max(outflow[c][node])))
            .filter(|&(_, size)| size > 0)
            .collect();
        let total: u64 = visible.iter().map(|v| v.1).sum();
        let gaps = visible.len().saturating_sub(1) as f64;
        let padding = if gaps > 0.0 {
            options.node_padding.min(0.5 * drawable / gaps)
        } else {
            0.0
        };
        let scale = if total > 0 {
            (drawable - padding * gaps) / total as f64
        } else {
            0.0
        };
        scales.push(scale);
        let mut y = options.margin;
        for (node, size) in visible {
            let (label, color) = match column {
                Column::Classes(_) => (
                    flows
                        .class_names
                        .get(node)
                        .cloned()
                        .unwrap_or_else(|| node.to_string()),
                    class_color(node).to_string(),
                ),
                Column::Clusters { .. } => (node.to_string(), NODE_GREY.to_string()),
            };
            let height = size as f64 * scale;
            node_id.insert((c, node), nodes.len());
            nodes.push(SankeyNode {
                id: nodes.len(),
                column: c,
                index: node,
                label,
                size,
                x: column_x[c],
                y0: y,
                height,
                color,
            });
            y += height + padding;
        }
    }

    let rank: Vec<Vec<usize>> = orders
        .iter()
        .map(|o| {
            let mut r = vec![0; o.len()];
            for (i, &n) in o.iter().enumerate() {
                r[n] = i;
            }
            r
        })
        .collect();

    struct Draft {
        pair: usize,
        src: usize,
        dst: usize,
        class: usize,
        count: u64,
        coverage: f64,
    }
    let mut drafts = Vec::new();
    for (p, pair) in flows.pairs.iter().enumerate() {
        for e in &pair.edges {
            let total = pair.class_totals[e.class];
            drafts.push(Draft {
                pair: p,
                src: node_id[&(pair.left, e.src)],
                dst: node_id[&(pair.right, e.dst)],
                class: e.class,
                count: e.count,
                coverage: e.count as f64 / total as f64,
            });
        }
    }

    let mut source_y = vec![[0.0; 2]; drafts.len()];
    let mut target_y = vec![[0.0; 2]; drafts.len()];
    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, d) in drafts.iter().enumerate() {
        by_node[d.src].push(i);
    }
    for (node, links) in by_node.iter_mut().enumerate() {
        links.sort_by_key(|&i| {
            let t = &nodes[drafts[i].dst];
            (rank[t.column][t.index], drafts[i].class)
        });
        let scale = scales[nodes[node].column];
        let mut y = nodes[node].y0;
        for &i in links.iter() {
            let w = drafts[i].count as f64 * scale;
            source_y[i] = [y, y + w];
            y += w;
        }
    }
    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, d) in drafts.iter().enumerate() {
        by_node[d.dst].push(i);
    }
    for (node, links) in by_node.iter_mut().enumerate() {
        links.sort_by_key(|&i| {
            let s = &nodes[drafts[i].src];
            (rank[s.column][s.index], drafts[i].class)
        });
        let scale = scales[nodes[node].column];
        let mut y = nodes[node].y0;
        for &i in links.iter() {
            let w = drafts[i].count as f64 * scale;
            target_y[i] = [y, y + w];
            y += w;
        }
    }

    let links = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let dimmed = options.dim_classes.contains(&d.class);
            let narrowest = (source_y[i][1] - source_y[i][0]).min(target_y[i][1] - target_y[i][0]);
            SankeyLink {
                source: d.src,
                target: d.dst,
                pair: d.pair,
                class: d.class,
                count: d.count,
                coverage: d.coverage,
                source_y: source_y[i],
                target_y: target_y[i],
                color: class_color(d.class).to_string(),
                opacity: options.link_opacity * if dimmed { options.dim_factor } else { 1.0 },
                thin: d.coverage < options.min_coverage || narrowest < options.min_link_width,
            }
        })
        .collect();

    let mut present = vec![false; flows.class_count()];
    for pair in &flows.pairs {
        for (c, &t) in pair.class_totals.iter().enumerate() {
            present[c] |= t > 0;
        }
    }
    let legend = flows
        .class_names
        .iter()
        .enumerate()
        .filter(|(c, _)| present[*c])
        .map(|(c, name)| LegendEntry {
            class: c,
            name: name.clone(),
            color: class_color(c).to_string(),
            dimmed: options.dim_classes.contains(&c),
        })
        .collect();

    Ok(SankeyGraph {
        title: options.title.clone().or_else(|| flows.filter.clone()),
        nodes,
        links,
        canvas: Canvas {
            width: options.width,
            height: options.height,
            column_x,
            column_names: columns
                .iter()
                .map(|c| match c {
                    Column::Clusters { name, .. } => name.clone(),
                    Column::Classes(_) => String::from("class"),
                })
                .collect(),
            scales,
            node_width: options.node_width,
            node_padding: options.node_padding,
            min_link_width: options.min_link_width,
        },
        legend,
    })
}

/// Human-readable description of a link, used in SVG titles.
pub fn link_caption(g: &SankeyGraph, link: &SankeyLink) -> String {
    let s = &g.nodes[link.source];
    let t = &g.nodes[link.target];
    let class = g
        .legend
        .iter()
        .find(|l| l.class == link.class)
        .map_or_else(|| link.class.to_string(), |l| l.name.clone());
    format!(
        "{}:{} -> {}:{} | class {} | count {} | coverage {:.4}",
        g.canvas.column_names[s.column],
        s.label,
        g.canvas.column_names[t.column],
        t.label,
        class,
        link.count,
        link.coverage
    )
}
