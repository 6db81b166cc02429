//! JSON and DOT renderings of networks and complexes.
//!
//! Everything is emitted in the canonical vertex and metric order, so equal
//! inputs always give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::complex::{
    AmbiguityWarning, CompatibilityReport, DimensionReport, SimplicialComplex,
};
use crate::network::{ClusterNetwork, MetricId, VertexId};
use crate::rational::format_rational;

const STYLES: [&str; 4] = ["solid", "dashed", "dotted", "bold"];

#[derive(Debug, Serialize)]
pub struct NetworkDoc<'a> {
    pub labels: Vec<&'a str>,
    pub metrics: &'a [MetricId],
    pub vertices: Vec<VertexDoc<'a>>,
    pub edges: Vec<EdgeDoc<'a>>,
}

#[derive(Debug, Serialize)]
pub struct VertexDoc<'a> {
    pub id: VertexId,
    pub name: String,
    pub members: Vec<&'a str>,
    pub metrics: Vec<&'a MetricId>,
    pub radii: BTreeMap<&'a str, String>,
}

#[derive(Debug, Serialize)]
pub struct EdgeDoc<'a> {
    pub child: VertexId,
    pub parent: VertexId,
    pub metrics: Vec<&'a MetricId>,
}

pub fn network_doc(net: &ClusterNetwork) -> NetworkDoc<'_> {
    NetworkDoc {
        labels: net.labels().iter().map(|l| l.as_str()).collect(),
        metrics: net.metrics(),
        vertices: net
            .vertices()
            .iter()
            .enumerate()
            .map(|(id, v)| VertexDoc {
                id,
                name: net.vertex_name(id),
                members: v.members.names(net.labels()),
                metrics: v.present_in().collect(),
                radii: v
                    .radius_by_metric
                    .iter()
                    .map(|(m, r)| (m.as_str(), format_rational(r)))
                    .collect(),
            })
            .collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                child: e.child,
                parent: e.parent,
                metrics: e.metrics.iter().collect(),
            })
            .collect(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

pub fn network_json(net: &ClusterNetwork) -> String {
    to_json(&network_doc(net))
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node per cluster and one edge per (inclusion, metric), styled by the
/// metric's position in the family.
pub fn network_dot(net: &ClusterNetwork) -> String {
    let mut out = String::from("digraph network {\n  rankdir=BT;\n  node [shape=box];\n");
    for id in 0..net.vertices().len() {
        writeln!(out, "  v{id} [label={}];", quote(&net.vertex_name(id))).unwrap();
    }
    for edge in net.edges() {
        for metric in &edge.metrics {
            let index = net.metric_index(metric).expect("edge metrics belong to the network");
            writeln!(
                out,
                "  v{} -> v{} [style={}, label={}];",
                edge.child,
                edge.parent,
                STYLES[index % STYLES.len()],
                quote(metric.as_str())
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Serialize)]
pub struct SimplexDoc<'a> {
    pub vertices: &'a [VertexId],
    pub names: Vec<String>,
    pub metric: &'a MetricId,
    pub anchor: [VertexId; 2],
}

#[derive(Debug, Serialize)]
pub struct DimensionDoc<'a> {
    pub subfamily: &'a [MetricId],
    pub overall: usize,
    pub pairs: Vec<PairDoc>,
    pub ambiguous: &'a [AmbiguityWarning],
}

#[derive(Debug, Serialize)]
pub struct PairDoc {
    pub lower: VertexId,
    pub upper: VertexId,
    pub lower_name: String,
    pub upper_name: String,
    pub dimension: usize,
}

#[derive(Debug, Serialize)]
pub struct ComplexDoc<'a> {
    pub subfamily: &'a [MetricId],
    pub simplices: Vec<SimplexDoc<'a>>,
    pub maximal: Vec<&'a [VertexId]>,
    pub dimension: DimensionDoc<'a>,
    /// Skipped vertices and incompatible ball pairs, in words.
    pub warnings: Vec<String>,
    pub compatibility: &'a CompatibilityReport,
}

pub fn dimension_doc<'a>(net: &ClusterNetwork, report: &'a DimensionReport) -> DimensionDoc<'a> {
    DimensionDoc {
        subfamily: &report.subfamily,
        overall: report.overall,
        pairs: report
            .pairs
            .iter()
            .map(|p| PairDoc {
                lower: p.lower,
                upper: p.upper,
                lower_name: net.vertex_name(p.lower),
                upper_name: net.vertex_name(p.upper),
                dimension: p.dimension,
            })
            .collect(),
        ambiguous: &report.ambiguous,
    }
}

pub fn complex_json(
    net: &ClusterNetwork,
    complex: &SimplicialComplex,
    dimension: &DimensionReport,
    compatibility: &CompatibilityReport,
) -> String {
    let doc = ComplexDoc {
        subfamily: complex.subfamily(),
        simplices: complex
            .simplices()
            .map(|s| SimplexDoc {
                vertices: &s.vertices,
                names: s.vertices.iter().map(|&v| net.vertex_name(v)).collect(),
                metric: &s.witness,
                anchor: [s.anchor.0, s.anchor.1],
            })
            .collect(),
        maximal: complex
            .maximal_simplices()
            .into_iter()
            .map(|s| s.vertices.as_slice())
            .collect(),
        dimension: dimension_doc(net, dimension),
        warnings: warnings(net, complex, compatibility),
        compatibility,
    };
    to_json(&doc)
}

fn warnings(
    net: &ClusterNetwork,
    complex: &SimplicialComplex,
    compatibility: &CompatibilityReport,
) -> Vec<String> {
    let mut out = Vec::new();
    for w in complex.warnings() {
        let names: Vec<String> = w.candidates.iter().map(|&c| net.vertex_name(c)).collect();
        out.push(format!(
            "{} has several minimal common superballs ({}); skipped",
            net.vertex_name(w.vertex),
            names.join(", ")
        ));
    }
    for v in &compatibility.violations {
        let names: Vec<&str> = v
            .intersection
            .iter()
            .map(|&i| net.labels()[i].as_str())
            .collect();
        out.push(format!(
            "{} ({}) and {} ({}) meet in {{{}}}, which is a ball of no metric",
            net.vertex_name(v.first),
            v.first_metric,
            net.vertex_name(v.second),
            v.second_metric,
            names.join(",")
        ));
    }
    out
}

pub fn dimension_json(net: &ClusterNetwork, report: &DimensionReport) -> String {
    to_json(&dimension_doc(net, report))
}

/// The 1-skeleton of a complex as an undirected graph.
pub fn complex_dot(net: &ClusterNetwork, complex: &SimplicialComplex) -> String {
    let mut out = String::from("graph complex {\n  node [shape=box];\n");
    let mut used: Vec<VertexId> = complex
        .simplices()
        .flat_map(|s| s.vertices.iter().copied())
        .collect();
    used.sort_unstable();
    used.dedup();
    for id in used {
        writeln!(out, "  v{id} [label={}];", quote(&net.vertex_name(id))).unwrap();
    }
    for (a, b) in complex.edges() {
        writeln!(out, "  v{a} -- v{b};").unwrap();
    }
    out.push_str("}\n");
    out
}
