//! Kernel extraction and the structural metrics of a definitional digraph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{Digraph, VertexId};
use crate::reduce::Reducer;
use crate::scc::strongly_connected_components;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelResult {
    pub kernel: Digraph,
    /// Removed for having no in-arc.
    pub nb_undefined: usize,
    /// Removed for having no out-arc.
    pub nb_undefining: usize,
}

/// Repeatedly removes every vertex of in-degree 0, then every vertex of
/// out-degree 0, until neither exists. Each phase removes the vertices that
/// qualify when it starts; vertices freed during a phase wait for the next
/// phase of their kind. Self-loops count toward both degrees.
pub fn kernel(g: &Digraph) -> KernelResult {
    let bound = g.index_bound();
    let mut indeg = vec![0usize; bound];
    let mut outdeg = vec![0usize; bound];
    let mut alive = vec![false; bound];
    let mut no_in: Vec<VertexId> = Vec::new();
    let mut no_out: Vec<VertexId> = Vec::new();
    for v in g.vertices() {
        let i = v.index();
        alive[i] = true;
        indeg[i] = g.in_degree(v);
        outdeg[i] = g.out_degree(v);
        if indeg[i] == 0 {
            no_in.push(v);
        }
        if outdeg[i] == 0 {
            no_out.push(v);
        }
    }
    let (mut nb_undefined, mut nb_undefining) = (0, 0);
    let mut removed: Vec<VertexId> = Vec::new();
    while !no_in.is_empty() || !no_out.is_empty() {
        let batch: Vec<VertexId> = std::mem::take(&mut no_in).into_iter().filter(|v| alive[v.index()]).collect();
        for &v in &batch {
            alive[v.index()] = false;
        }
        for &v in &batch {
            nb_undefined += 1;
            removed.push(v);
            for &w in g.out_neighbors(v) {
                if alive[w.index()] {
                    indeg[w.index()] -= 1;
                    if indeg[w.index()] == 0 {
                        no_in.push(w);
                    }
                }
            }
        }
        let batch: Vec<VertexId> = std::mem::take(&mut no_out).into_iter().filter(|v| alive[v.index()]).collect();
        for &v in &batch {
            alive[v.index()] = false;
        }
        for &v in &batch {
            nb_undefining += 1;
            removed.push(v);
            for &p in g.in_neighbors(v) {
                if alive[p.index()] {
                    outdeg[p.index()] -= 1;
                    if outdeg[p.index()] == 0 {
                        no_out.push(p);
                    }
                }
            }
        }
    }
    let mut kernel = g.clone();
    kernel.remove_vertices(removed).expect("each vertex removed once");
    KernelResult { kernel, nb_undefined, nb_undefining }
}

/// `|A| / (n (n - 1))`, or 0 below two vertices.
pub fn density(vertices: usize, arcs: usize) -> f64 {
    if vertices < 2 {
        return 0.0;
    }
    arcs as f64 / (vertices as f64 * (vertices as f64 - 1.0))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nb_vertices: usize,
    pub size_kernel: usize,
    pub size_reduced_kernel: usize,
    pub nc_reduced_kernel: usize,
    pub init_nb_arcs: usize,
    pub final_nb_arcs: usize,
    pub nc_final_arcs: usize,
    pub nb_undefined: usize,
    pub nb_undefining: usize,
    pub nb_sccs_kernel: usize,
    pub kernel_nb_arcs: usize,
    /// Rounded to four decimals.
    pub kernel_density: f64,
}

/// Row labels of the text table, in field order.
pub const ROW_LABELS: [&str; 12] = [
    "Nb vertices",
    "Size Kernel",
    "Size Red. Ker.",
    "NC Red Ker.",
    "Init. Nb Arcs",
    "Final Nb Arcs",
    "NC Final Arcs",
    "Nb Undefined",
    "Nb Undefining",
    "Nb SCCs Kernel",
    "Kernel Nb Arcs",
    "Kernel Density",
];

const FIELDS: [&str; 12] = [
    "nb_vertices",
    "size_kernel",
    "size_reduced_kernel",
    "nc_reduced_kernel",
    "init_nb_arcs",
    "final_nb_arcs",
    "nc_final_arcs",
    "nb_undefined",
    "nb_undefining",
    "nb_sccs_kernel",
    "kernel_nb_arcs",
    "kernel_density",
];

impl MetricsReport {
    /// Kernel, confluent reduction of the kernel, then the non-confluent
    /// reduction of that result.
    pub fn compute(g: &Digraph) -> Self {
        let k = kernel(g);
        let (confluent, _) = Reducer::confluent().run(k.kernel.clone());
        let (nonconfluent, _) = Reducer::nonconfluent().run(confluent.clone());
        Self::from_parts(g, &k, &confluent, &nonconfluent)
    }

    pub fn from_parts(g: &Digraph, k: &KernelResult, confluent: &Digraph, nonconfluent: &Digraph) -> Self {
        let size_kernel = k.kernel.vertex_count();
        let kernel_nb_arcs = k.kernel.arc_count();
        Self {
            nb_vertices: g.vertex_count(),
            size_kernel,
            size_reduced_kernel: confluent.vertex_count(),
            nc_reduced_kernel: nonconfluent.vertex_count(),
            init_nb_arcs: g.arc_count(),
            final_nb_arcs: confluent.arc_count(),
            nc_final_arcs: nonconfluent.arc_count(),
            nb_undefined: k.nb_undefined,
            nb_undefining: k.nb_undefining,
            nb_sccs_kernel: strongly_connected_components(&k.kernel).len(),
            kernel_nb_arcs,
            kernel_density: round4(density(size_kernel, kernel_nb_arcs)),
        }
    }

    fn cells(&self) -> [String; 12] {
        let n = |x: usize| x.to_string();
        [
            n(self.nb_vertices),
            n(self.size_kernel),
            n(self.size_reduced_kernel),
            n(self.nc_reduced_kernel),
            n(self.init_nb_arcs),
            n(self.final_nb_arcs),
            n(self.nc_final_arcs),
            n(self.nb_undefined),
            n(self.nb_undefining),
            n(self.nb_sccs_kernel),
            n(self.kernel_nb_arcs),
            format!("{:.4}", self.kernel_density),
        ]
    }

    /// Aligned two-column table, one row per metric.
    pub fn to_table(&self) -> String {
        table(&[("", *self)])
    }
}

/// Aligned table with one column per named report.
pub fn table(reports: &[(&str, MetricsReport)]) -> String {
    let label_width = ROW_LABELS.iter().map(|l| l.len()).max().unwrap_or(0);
    let cells: Vec<[String; 12]> = reports.iter().map(|(_, r)| r.cells()).collect();
    let widths: Vec<usize> = reports
        .iter()
        .zip(&cells)
        .map(|((name, _), c)| c.iter().map(String::len).chain([name.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    if reports.iter().any(|(name, _)| !name.is_empty()) {
        let _ = write!(out, "{:label_width$}", "");
        for ((name, _), w) in reports.iter().zip(&widths) {
            let _ = write!(out, "  {name:>w$}");
        }
        out.push('\n');
    }
    for (row, label) in ROW_LABELS.iter().enumerate() {
        let _ = write!(out, "{label:label_width$}");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", c[row]);
        }
        out.push('\n');
    }
    out
}

/// CSV with a header of field names and one row per named report.
pub fn to_csv(reports: &[(&str, MetricsReport)]) -> String {
    let mut out = String::from("name,");
    out.push_str(&FIELDS.join(","));
    out.push('\n');
    for (name, r) in reports {
        out.push_str(name);
        for cell in r.cells() {
            out.push(',');
            out.push_str(&cell);
        }
        out.push('\n');
    }
    out
}

/// Labels present in every graph, sorted.
pub fn common_symbols(graphs: &[Digraph]) -> Vec<String> {
    let mut iter = graphs.iter();
    let Some(first) = iter.next() else { return Vec::new() };
    let mut common: BTreeSet<String> = first.label_set();
    for g in iter {
        common.retain(|l| g.vertex(l).is_some());
    }
    common.into_iter().collect()
}
