//! JSON report and DOT export of a residue graph.

use std::collections::HashMap;
use std::fmt::Write;

use hyplat::voronoi::{GeneratorSet, ResidueGraph, VerificationReport};
use hyplat::IntMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Row-major matrix of decimal strings.
pub type MatrixJson = Vec<Vec<String>>;

pub fn matrix_json(m: &IntMatrix) -> MatrixJson {
    m.to_rows().iter().map(|r| vector_json(r)).collect()
}

pub fn vector_json(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub input: InputReport,
    /// The pipeline that ran: `direct` or `watson`.
    pub mode: String,
    pub requested_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watson: Option<WatsonReport>,
    /// Classes of the traversed lattice: the input in direct mode, the
    /// Watson lattice otherwise.
    pub classes: Vec<ClassReport>,
    pub edges: Vec<EdgeReport>,
    pub num_connecting_elements: usize,
    /// Generators of the automorphism group of the input, in its coordinates.
    pub generators: Vec<MatrixJson>,
    pub minus_identity_included: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputReport {
    pub source: String,
    pub dim: usize,
    pub matrix: MatrixJson,
    pub det: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WatsonReport {
    /// Primes of the fillings, in order.
    pub chain: Vec<String>,
    pub det_before: String,
    pub det_after: String,
    pub gram: MatrixJson,
    /// Basis rows of the Watson lattice in the coordinates of the input.
    pub basis: MatrixJson,
    /// The form on the Watson lattice is the input form times this factor.
    pub scale: String,
    /// Length of the orbit of the input lattice under the Watson group.
    pub orbit_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    /// 1-based, as in the labels `x_i` and `c_{i,j}`.
    pub id: usize,
    pub vector: Vec<String>,
    /// `N(x) = -x A x^tr`
    #[serde(rename = "N")]
    pub norm: String,
    pub minimum: String,
    pub num_minvecs: usize,
    pub num_directions: usize,
    pub num_neighbours: usize,
    pub num_direction_orbits: usize,
    pub stabilizer_order: Option<String>,
    pub stabilizer_generators: Vec<MatrixJson>,
}

/// A directed half-edge of the residue graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub from: usize,
    pub to: usize,
    pub ray: Vec<String>,
    pub reverse_ray: Vec<String>,
    /// Index of the half-edge in the opposite direction.
    pub partner: Option<usize>,
    pub tree: bool,
    /// `c_{i,j}` with primes for repeated pairs; absent on tree edges.
    pub label: Option<String>,
    pub connecting: Option<MatrixJson>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub watson_ms: f64,
    pub traverse_ms: f64,
    pub recover_ms: f64,
    pub verify_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationJson {
    pub passed: bool,
    pub violations: Vec<String>,
}

impl VerificationJson {
    pub fn from_report(r: &VerificationReport, extra: Vec<String>) -> Self {
        let mut violations: Vec<String> = r.violations.iter().map(|v| v.to_string()).collect();
        violations.extend(extra);
        VerificationJson { passed: violations.is_empty(), violations }
    }
}

/// `c_{i,j}`, `c_{i,j}'`, ... for the non-tree half-edges, by edge index.
pub fn edge_labels(graph: &ResidueGraph) -> Vec<Option<String>> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    graph
        .edges
        .iter()
        .map(|e| {
            e.connecting.as_ref().map(|_| {
                let k = seen.entry((e.from, e.to)).or_insert(0);
                let label = format!("c_{{{},{}}}{}", e.from + 1, e.to + 1, "'".repeat(*k));
                *k += 1;
                label
            })
        })
        .collect()
}

pub fn classes_json(graph: &ResidueGraph) -> Vec<ClassReport> {
    graph
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| ClassReport {
            id: i + 1,
            vector: vector_json(&p.vector),
            norm: p.norm().to_string(),
            minimum: p.minimum().to_string(),
            num_minvecs: p.minvecs().len(),
            num_directions: graph.summaries[i].num_directions,
            num_neighbours: graph.summaries[i].num_non_blind,
            num_direction_orbits: graph.summaries[i].num_direction_orbits,
            stabilizer_order: graph.stabilizers[i].order().map(|o| o.to_string()),
            stabilizer_generators: graph.stabilizers[i].generators().iter().map(|g| matrix_json(g.matrix())).collect(),
        })
        .collect()
}

pub fn edges_json(graph: &ResidueGraph) -> Vec<EdgeReport> {
    let labels = edge_labels(graph);
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| EdgeReport {
            from: e.from + 1,
            to: e.to + 1,
            ray: vector_json(&e.ray),
            reverse_ray: vector_json(&e.reverse_ray),
            partner: graph.partner(k),
            tree: e.is_tree(),
            label: labels[k].clone(),
            connecting: e.connecting.as_ref().map(|c| matrix_json(c.matrix())),
        })
        .collect()
}

pub fn generators_json(gens: &GeneratorSet) -> Vec<MatrixJson> {
    gens.generators.iter().map(|g| matrix_json(g.matrix())).collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Undirected DOT graph: one node per class, one edge per pair of opposite
/// half-edges, labelled with their connecting elements.
pub fn to_dot(report: &Report) -> String {
    let mut out = String::from("graph residue {\n");
    for c in &report.classes {
        let label = format!("x{} ({})", c.id, c.vector.join(", "));
        let _ = writeln!(out, "  x{} [label=\"{}\"];", c.id, dot_escape(&label));
    }
    let mut drawn = vec![false; report.edges.len()];
    for (k, e) in report.edges.iter().enumerate() {
        if drawn[k] {
            continue;
        }
        drawn[k] = true;
        let mut labels: Vec<String> = e.label.iter().cloned().collect();
        if let Some(p) = e.partner.filter(|&p| p != k && p < drawn.len()) {
            drawn[p] = true;
            labels.extend(report.edges[p].label.iter().cloned());
        }
        if labels.is_empty() {
            let _ = writeln!(out, "  x{} -- x{};", e.from, e.to);
        } else {
            let _ = writeln!(out, "  x{} -- x{} [label=\"{}\"];", e.from, e.to, dot_escape(&labels.join(", ")));
        }
    }
    out.push_str("}\n");
    out
}
