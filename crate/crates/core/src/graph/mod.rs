//! Call graphs: functions as vertices, calls as directed edges.
//!
//! A vertex is either a *local* function, whose symbol name is an arbitrary
//! compiler-assigned identifier, or an *external* function (a system or
//! library call) whose name is canonical across executables. Only external
//! names take part in matching.

mod corpus;
mod parse;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use corpus::{is_graph_file, load_graph_file, read_families_csv, write_families_csv, GraphCorpus};
pub use parse::{parse_graph, parse_graph_with, serialize_graph, ParseOptions};

/// Where in an input a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// 1-based line number in a line-oriented file.
    Line(usize),
    /// Field path in a structured file, e.g. `vertices[3].name`.
    Field(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Field(path) => write!(f, "field {path}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {message}")]
    Malformed { location: Location, message: String },
    #[error("{location}: empty function name")]
    EmptyName { location: Location },
    #[error("{location}: duplicate external function {name:?} (first defined as vertex {first})")]
    DuplicateExternal {
        location: Location,
        name: String,
        first: usize,
    },
    #[error("{location}: edge references unknown vertex {id}")]
    UnknownVertex { location: Location, id: String },
    #[error("graph has no label")]
    MissingLabel,
    #[error("duplicate sample label {0:?} in corpus")]
    DuplicateLabel(String),
    #[error("family labels do not cover the corpus: {0}")]
    FamilyMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Local,
    External,
}

impl FunctionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionKind::Local => "local",
            FunctionKind::External => "external",
        }
    }
}

impl std::str::FromStr for FunctionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(FunctionKind::Local),
            "external" => Ok(FunctionKind::External),
            other => Err(format!("unknown function kind {other:?} (expected local or external)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    pub name: String,
    pub kind: FunctionKind,
}

impl Vertex {
    pub fn is_external(&self) -> bool {
        self.kind == FunctionKind::External
    }
}

/// A validated, immutable call graph.
///
/// Vertex ids are dense (`0..order`), edges form a set of ordered pairs kept
/// sorted, and external names are unique within the graph.
#[derive(Debug, Clone)]
pub struct CallGraph {
    label: String,
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for CallGraph {}

impl CallGraph {
    /// Builds a graph from `(name, kind)` pairs and `(source, target)` edges.
    /// Duplicate edges are collapsed.
    pub fn new<S, E>(
        label: impl Into<String>,
        vertices: impl IntoIterator<Item = (S, FunctionKind)>,
        edges: E,
    ) -> Result<Self, GraphError>
    where
        S: Into<String>,
        E: IntoIterator<Item = (usize, usize)>,
    {
        let vertices: Vec<(String, FunctionKind)> =
            vertices.into_iter().map(|(n, k)| (n.into(), k)).collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        build(
            label.into(),
            vertices,
            edges,
            false,
            |i| Location::Field(format!("vertices[{i}]")),
            |i| Location::Field(format!("edges[{i}]")),
        )
    }

    /// The null graph K0.
    pub fn empty(label: impl Into<String>) -> Self {
        CallGraph {
            label: label.into(),
            vertices: Vec::new(),
            edges: Vec::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same graph under a different sample label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    /// Edges sorted by `(source, target)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_null(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn successors(&self, id: usize) -> &[usize] {
        &self.out_adj[id]
    }

    pub fn predecessors(&self, id: usize) -> &[usize] {
        &self.in_adj[id]
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        source < self.order() && self.out_adj[source].binary_search(&target).is_ok()
    }

    /// Total degree, a self-loop counted once.
    pub fn degree(&self, id: usize) -> usize {
        let self_loop = usize::from(self.has_edge(id, id));
        self.out_adj[id].len() + self.in_adj[id].len() - self_loop
    }

    pub fn external_id(&self, name: &str) -> Option<usize> {
        self.vertices
            .iter()
            .find(|v| v.is_external() && v.name == name)
            .map(|v| v.id)
    }
}

pub(crate) fn build(
    label: String,
    vertices: Vec<(String, FunctionKind)>,
    edges: Vec<(usize, usize)>,
    merge_duplicate_externals: bool,
    vertex_location: impl Fn(usize) -> Location,
    edge_location: impl Fn(usize) -> Location,
) -> Result<CallGraph, GraphError> {
    if label.is_empty() {
        return Err(GraphError::MissingLabel);
    }
    // remap[i] = dense id of input vertex i
    let mut remap = Vec::with_capacity(vertices.len());
    let mut kept: Vec<Vertex> = Vec::with_capacity(vertices.len());
    let mut externals: HashMap<String, usize> = HashMap::new();
    for (i, (name, kind)) in vertices.into_iter().enumerate() {
        if name.is_empty() {
            return Err(GraphError::EmptyName {
                location: vertex_location(i),
            });
        }
        if kind == FunctionKind::External {
            if let Some(&first) = externals.get(&name) {
                if merge_duplicate_externals {
                    remap.push(first);
                    continue;
                }
                return Err(GraphError::DuplicateExternal {
                    location: vertex_location(i),
                    name,
                    first,
                });
            }
            externals.insert(name.clone(), kept.len());
        }
        remap.push(kept.len());
        kept.push(Vertex {
            id: kept.len(),
            name,
            kind,
        });
    }

    let mut dense = Vec::with_capacity(edges.len());
    for (i, (s, t)) in edges.into_iter().enumerate() {
        for id in [s, t] {
            if id >= remap.len() {
                return Err(GraphError::UnknownVertex {
                    location: edge_location(i),
                    id: id.to_string(),
                });
            }
        }
        dense.push((remap[s], remap[t]));
    }
    Ok(assemble(label, kept, dense))
}

/// Assembles a graph from already-validated parts.
pub(crate) fn assemble(label: String, vertices: Vec<Vertex>, mut edges: Vec<(usize, usize)>) -> CallGraph {
    edges.sort_unstable();
    edges.dedup();
    let n = vertices.len();
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    for &(s, t) in &edges {
        out_adj[s].push(t);
        in_adj[t].push(s);
    }
    for list in &mut in_adj {
        list.sort_unstable();
    }
    CallGraph {
        label,
        vertices,
        edges,
        out_adj,
        in_adj,
    }
}

/// An edge where an external function calls a local one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConventionWarning {
    pub source: usize,
    pub target: usize,
    pub source_name: String,
    pub target_name: String,
}

impl fmt::Display for ConventionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "external function {} (vertex {}) calls local function {} (vertex {})",
            self.source_name, self.source, self.target_name, self.target
        )
    }
}

/// Reports every external→local call. Extractors normally never produce
/// these, but they are not structurally invalid.
pub fn validate_conventions(g: &CallGraph) -> Vec<ConventionWarning> {
    g.edges()
        .iter()
        .filter(|&&(s, t)| g.vertex(s).is_external() && !g.vertex(t).is_external())
        .map(|&(s, t)| ConventionWarning {
            source: s,
            target: t,
            source_name: g.vertex(s).name.clone(),
            target_name: g.vertex(t).name.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GraphStats {
    pub order: usize,
    pub size: usize,
    pub externals: usize,
    pub locals: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "order={} size={} external={} local={}",
            self.order, self.size, self.externals, self.locals
        )
    }
}

pub fn graph_stats(g: &CallGraph) -> GraphStats {
    let externals = g.vertices().iter().filter(|v| v.is_external()).count();
    GraphStats {
        order: g.order(),
        size: g.size(),
        externals,
        locals: g.order() - externals,
    }
}
