use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Deserialize;

use super::{build, CallGraph, FunctionKind, GraphError, Location};

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Collapse repeated external names into one vertex, unioning edges.
    pub merge_duplicate_externals: bool,
    /// Label used when the file does not carry one (usually the file stem).
    pub default_label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    label: Option<String>,
    vertices: Vec<VertexRecord>,
    edges: Vec<[usize; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    name: String,
    kind: FunctionKind,
}

pub fn parse_graph(contents: &str) -> Result<CallGraph, GraphError> {
    parse_graph_with(contents, &ParseOptions::default())
}

/// Parses either the structured (JSON) format or the line-oriented
/// `v`/`e` format, chosen by the first non-blank character.
pub fn parse_graph_with(contents: &str, opts: &ParseOptions) -> Result<CallGraph, GraphError> {
    if contents.trim_start().starts_with('{') {
        parse_structured(contents, opts)
    } else {
        parse_lines(contents, opts)
    }
}

fn parse_structured(contents: &str, opts: &ParseOptions) -> Result<CallGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(contents).map_err(|e| GraphError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let label = file
        .label
        .or_else(|| opts.default_label.clone())
        .ok_or(GraphError::MissingLabel)?;
    let vertices = file.vertices.into_iter().map(|v| (v.name, v.kind)).collect();
    let edges = file.edges.into_iter().map(|[s, t]| (s, t)).collect();
    build(
        label,
        vertices,
        edges,
        opts.merge_duplicate_externals,
        |i| Location::Field(format!("vertices[{i}]")),
        |i| Location::Field(format!("edges[{i}]")),
    )
}

fn parse_lines(contents: &str, opts: &ParseOptions) -> Result<CallGraph, GraphError> {
    let mut label = None;
    let mut vertices = Vec::new();
    let mut vertex_lines = Vec::new();
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut raw_edges: Vec<(usize, &str, &str)> = Vec::new();

    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let malformed = |message: String| GraphError::Malformed {
            location: Location::Line(lineno),
            message,
        };
        match fields[0] {
            "label" if fields.len() == 2 => label = Some(fields[1].to_string()),
            "v" => {
                if fields.len() != 4 {
                    return Err(malformed(format!(
                        "expected `v <id> <name> <local|external>`, found {} fields",
                        fields.len()
                    )));
                }
                let id: u64 = fields[1]
                    .parse()
                    .map_err(|_| malformed(format!("vertex id {:?} is not a non-negative integer", fields[1])))?;
                let kind: FunctionKind = fields[3].parse().map_err(malformed)?;
                if ids.insert(id, vertices.len()).is_some() {
                    return Err(malformed(format!("vertex id {id} defined twice")));
                }
                vertices.push((fields[2].to_string(), kind));
                vertex_lines.push(lineno);
            }
            "e" => {
                if fields.len() != 3 {
                    return Err(malformed(format!(
                        "expected `e <source> <target>`, found {} fields",
                        fields.len()
                    )));
                }
                raw_edges.push((lineno, fields[1], fields[2]));
            }
            other => return Err(malformed(format!("unrecognized record {other:?}"))),
        }
    }

    let mut edges = Vec::with_capacity(raw_edges.len());
    let mut edge_lines = Vec::with_capacity(raw_edges.len());
    for &(lineno, s, t) in &raw_edges {
        let resolve = |token: &str| {
            token
                .parse::<u64>()
                .ok()
                .and_then(|id| ids.get(&id).copied())
                .ok_or_else(|| GraphError::UnknownVertex {
                    location: Location::Line(lineno),
                    id: token.to_string(),
                })
        };
        edges.push((resolve(s)?, resolve(t)?));
        edge_lines.push(lineno);
    }

    let label = label
        .or_else(|| opts.default_label.clone())
        .ok_or(GraphError::MissingLabel)?;
    build(
        label,
        vertices,
        edges,
        opts.merge_duplicate_externals,
        |i| Location::Line(vertex_lines[i]),
        |i| Location::Line(edge_lines[i]),
    )
}

/// Renders the structured format. Edges are emitted sorted, so equal graphs
/// serialize to identical bytes.
pub fn serialize_graph(g: &CallGraph) -> String {
    let quote = |s: &str| serde_json::to_string(s).expect("string serialization cannot fail");
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"label\": {},", quote(g.label()));
    if g.vertices().is_empty() {
        out.push_str("  \"vertices\": [],\n");
    } else {
        out.push_str("  \"vertices\": [\n");
        for (i, v) in g.vertices().iter().enumerate() {
            let sep = if i + 1 == g.order() { "" } else { "," };
            let _ = writeln!(
                out,
                "    {{\"name\": {}, \"kind\": \"{}\"}}{sep}",
                quote(&v.name),
                v.kind.as_str()
            );
        }
        out.push_str("  ],\n");
    }
    if g.edges().is_empty() {
        out.push_str("  \"edges\": []\n");
    } else {
        out.push_str("  \"edges\": [\n");
        for (i, (s, t)) in g.edges().iter().enumerate() {
            let sep = if i + 1 == g.size() { "" } else { "," };
            let _ = writeln!(out, "    [{s}, {t}]{sep}");
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out
}
