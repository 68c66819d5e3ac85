//! Serialization of the computed artifacts: object tables, DOT quivers,
//! hom tables, algebra dumps. All output is deterministic: maps are sorted
//! and vertex order is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{ArQuiver, ClusterCategory};
use crate::field::Field;
use crate::quiver::GradedAlgebra;

#[derive(Serialize)]
pub struct ObjectRow {
    pub name: String,
    pub row: usize,
    pub column: usize,
    pub interval: (usize, usize),
    pub shift: i32,
    /// cohomology dimension vectors of the underlying complex
    pub h_dim_vectors: BTreeMap<i32, Vec<usize>>,
}

pub fn object_table<K: Field>(cat: &ClusterCategory<K>) -> Vec<ObjectRow> {
    cat.objects()
        .into_iter()
        .map(|x| {
            let name = cat.name(x);
            let (iv, k) = cat.triple(x);
            ObjectRow {
                name: name.to_string(),
                row: name.k,
                column: name.j,
                interval: (iv.a, iv.b),
                shift: k,
                h_dim_vectors: cat.complex(x).h_dim_vectors(),
            }
        })
        .collect()
}

/// Canonical DOT rendering: vertices in name order, solid arrows, dashed
/// tau edges.
pub fn quiver_dot(quiver: &ArQuiver, graph_name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {graph_name} {{\n"));
    out.push_str("  rankdir=LR;\n");
    let mut order: Vec<usize> = (0..quiver.names.len()).collect();
    order.sort_by_key(|&i| quiver.names[i]);
    for &i in &order {
        out.push_str(&format!("  \"{}\";\n", quiver.names[i]));
    }
    let mut arrows: Vec<(String, String, usize)> = quiver
        .arrows
        .iter()
        .map(|&(s, t, m)| (quiver.names[s].to_string(), quiver.names[t].to_string(), m))
        .collect();
    arrows.sort();
    for (s, t, m) in arrows {
        if m == 1 {
            out.push_str(&format!("  \"{s}\" -> \"{t}\";\n"));
        } else {
            out.push_str(&format!("  \"{s}\" -> \"{t}\" [label=\"{m}\"];\n"));
        }
    }
    let mut tau_edges: Vec<(String, String)> = Vec::new();
    for (i, &t) in quiver.tau.iter().enumerate() {
        if t != usize::MAX {
            tau_edges.push((quiver.names[i].to_string(), quiver.names[t].to_string()));
        }
    }
    tau_edges.sort();
    for (s, t) in tau_edges {
        out.push_str(&format!("  \"{s}\" -> \"{t}\" [style=dashed, arrowhead=empty];\n"));
    }
    out.push_str("}\n");
    out
}

/// Adjacency form used for golden figure comparison (graph isomorphism with
/// label constraints reduces to equality of these maps).
#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct GoldenQuivers {
    pub ar: BTreeMap<String, BTreeMap<String, usize>>,
    #[serde(default)]
    pub quotient_ar: Option<BTreeMap<String, BTreeMap<String, usize>>>,
}

#[derive(Serialize)]
pub struct HomRow {
    pub x: String,
    pub y: String,
    pub degree: i32,
    pub ambient_dim: usize,
    pub quotient_dim: usize,
}

#[derive(Serialize)]
pub struct AlgebraDump {
    pub vertices: Vec<String>,
    pub basis: Vec<AlgebraElemDump>,
    pub dims_by_degree: BTreeMap<i32, usize>,
    /// products `basis[i] * basis[j]` with their expansions; zero products
    /// are omitted
    pub products: Vec<ProductRow>,
    pub zero_differential: bool,
}

#[derive(Serialize)]
pub struct AlgebraElemDump {
    pub label: String,
    pub degree: i32,
    pub src: String,
    pub tgt: String,
}

#[derive(Serialize)]
pub struct ProductRow {
    pub left: String,
    pub right: String,
    pub result: Vec<(String, String)>,
}

pub fn algebra_dump<K: Field>(alg: &GradedAlgebra<K>) -> AlgebraDump {
    let k = &alg.field;
    let mut products = Vec::new();
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            let p = alg.product(i, j);
            if p.is_empty() {
                continue;
            }
            products.push(ProductRow {
                left: alg.elems[i].label.clone(),
                right: alg.elems[j].label.clone(),
                result: p
                    .iter()
                    .map(|(t, c)| (alg.elems[*t].label.clone(), k.render(c)))
                    .collect(),
            });
        }
    }
    AlgebraDump {
        vertices: alg.vertices.clone(),
        basis: alg
            .elems
            .iter()
            .map(|e| AlgebraElemDump {
                label: e.label.clone(),
                degree: e.degree,
                src: alg.vertices[e.src].clone(),
                tgt: alg.vertices[e.tgt].clone(),
            })
            .collect(),
        dims_by_degree: alg.dims_by_degree(),
        products,
        zero_differential: alg.has_zero_differential(),
    }
}

#[derive(Serialize)]
pub struct DemModuleRow {
    pub object: String,
    pub h_dims: Vec<(i32, String, usize)>,
    pub total_dim: usize,
}
