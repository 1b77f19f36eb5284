use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{link_caption, SankeyGraph, SankeyLink};
use crate::error::{Error, Result};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Ribbon ends as drawn: thin links are re-centred at the minimum width.
fn drawn_ends(link: &SankeyLink, min_width: f64) -> ([f64; 2], [f64; 2]) {
    if !link.thin {
        return (link.source_y, link.target_y);
    }
    let widen = |y: [f64; 2]| {
        let mid = 0.5 * (y[0] + y[1]);
        [mid - 0.5 * min_width, mid + 0.5 * min_width]
    };
    (widen(link.source_y), widen(link.target_y))
}

fn write_svg(g: &SankeyGraph, out: &mut String, standalone: bool) {
    let c = &g.canvas;
    if standalone {
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\" font-family=\"sans-serif\" font-size=\"11\">",
        c.width, c.height, c.width, c.height
    );
    if let Some(title) = &g.title {
        let _ = writeln!(out, "<title>{}</title>", escape(title));
    }
    out.push_str("<g class=\"links\">\n");
    for link in &g.links {
        let s = &g.nodes[link.source];
        let t = &g.nodes[link.target];
        let x0 = s.x + c.node_width;
        let x1 = t.x;
        let xm = 0.5 * (x0 + x1);
        let (sy, ty) = drawn_ends(link, c.min_link_width);
        let _ = writeln!(
            out,
            "<path class=\"link\" d=\"M{x0:.3},{:.3} C{xm:.3},{:.3} {xm:.3},{:.3} {x1:.3},{:.3} L{x1:.3},{:.3} C{xm:.3},{:.3} {xm:.3},{:.3} {x0:.3},{:.3} Z\" fill=\"{}\" fill-opacity=\"{:.3}\" data-class=\"{}\" data-count=\"{}\" data-source-width=\"{:.4}\" data-target-width=\"{:.4}\" data-thin=\"{}\"><title>{}</title></path>",
            sy[0], sy[0], ty[0], ty[0], ty[1], ty[1], sy[1], sy[1],
            link.color,
            link.opacity,
            link.class,
            link.count,
            link.source_width(),
            link.target_width(),
            link.thin,
            escape(&link_caption(g, link)),
        );
    }
    out.push_str("</g>\n<g class=\"nodes\">\n");
    for node in &g.nodes {
        let _ = writeln!(
            out,
            "<rect class=\"node\" x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"><title>{}:{} ({})</title></rect>",
            node.x,
            node.y0,
            c.node_width,
            node.height,
            node.color,
            escape(&c.column_names[node.column]),
            escape(&node.label),
            node.size
        );
        let last = node.column + 1 == c.column_x.len();
        let (tx, anchor) = if last {
            (node.x - 4.0, "end")
        } else {
            (node.x + c.node_width + 4.0, "start")
        };
        let _ = writeln!(
            out,
            "<text x=\"{tx:.3}\" y=\"{:.3}\" dy=\"0.35em\" text-anchor=\"{anchor}\">{}</text>",
            node.y0 + 0.5 * node.height,
            escape(&node.label)
        );
    }
    out.push_str("</g>\n<g class=\"columns\">\n");
    for (x, name) in c.column_x.iter().zip(&c.column_names) {
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"16\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>",
            x + 0.5 * c.node_width,
            escape(name)
        );
    }
    out.push_str("</g>\n</svg>\n");
}

/// Standalone SVG 1.1 document: one `rect` per node, one closed cubic
/// Bézier ribbon per link.
pub fn emit_svg(g: &SankeyGraph) -> Vec<u8> {
    let mut out = String::new();
    write_svg(g, &mut out, true);
    out.into_bytes()
}

pub fn emit_json(g: &SankeyGraph) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(g).expect("sankey graphs serialize");
    bytes.push(b'\n');
    bytes
}

pub fn parse_json(bytes: &[u8]) -> Result<SankeyGraph> {
    serde_json::from_slice(bytes).map_err(|e| Error::invalid("sankey json", alloc::format!("{e}")))
}

/// Self-contained HTML page: the SVG inline plus a class colour legend.
pub fn emit_html(g: &SankeyGraph) -> Vec<u8> {
    let title = g.title.as_deref().unwrap_or("Decision flows");
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    out.push_str(
        "<style>\nbody{font-family:sans-serif;margin:16px;}\n\
         ul.legend{list-style:none;padding:0;display:flex;flex-wrap:wrap;gap:12px;}\n\
         ul.legend li{display:flex;align-items:center;gap:4px;}\n\
         .swatch{display:inline-block;width:14px;height:14px;}\n\
         path.link:hover{fill-opacity:0.9;}\n</style>\n</head>\n<body>\n",
    );
    let _ = writeln!(out, "<h1>{}</h1>", escape(title));
    out.push_str("<ul class=\"legend\">\n");
    for entry in &g.legend {
        let _ = writeln!(
            out,
            "<li><span class=\"swatch\" style=\"background:{};opacity:{}\"></span>{}</li>",
            entry.color,
            if entry.dimmed { "0.25" } else { "1" },
            escape(&entry.name)
        );
    }
    out.push_str("</ul>\n");
    write_svg(g, &mut out, false);
    out.push_str("</body>\n</html>\n");
    out.into_bytes()
}
