//! Synthetic call-graph corpora with planted families.
//!
//! Each family grows from a random base graph; members are derived from it by
//! random edit operations, either all from the base or chained one after the
//! other. Family labels are emitted alongside the graphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{CallGraph, FunctionKind, GraphCorpus, GraphError};

/// External function names shared by every generated family.
pub const EXTERNAL_NAMES: &[&str] = &[
    "CloseHandle", "CreateFileA", "CreateFileW", "CreateMutexA", "CreateProcessA", "CreateProcessW",
    "CreateRemoteThread", "CreateThread", "CreateToolhelp32Snapshot", "DeleteFileA", "DeviceIoControl",
    "ExitProcess", "ExitThread", "FindClose", "FindFirstFileA", "FindNextFileA", "FreeLibrary",
    "GetCommandLineA", "GetComputerNameA", "GetCurrentProcess", "GetCurrentProcessId", "GetFileSize",
    "GetLastError", "GetModuleFileNameA", "GetModuleHandleA", "GetProcAddress", "GetStartupInfoA",
    "GetSystemDirectoryA", "GetTempPathA", "GetTickCount", "GetVersionExA", "GetWindowsDirectoryA",
    "GlobalAlloc", "GlobalFree", "HeapAlloc", "HeapCreate", "HeapFree", "InternetOpenA",
    "InternetOpenUrlA", "InternetReadFile", "IsDebuggerPresent", "LoadLibraryA", "LoadLibraryW",
    "LocalAlloc", "LocalFree", "MapViewOfFile", "MessageBoxA", "MoveFileA", "OpenMutexA", "OpenProcess",
    "Process32First", "Process32Next", "QueryPerformanceCounter", "ReadFile", "ReadProcessMemory",
    "RegCloseKey", "RegCreateKeyExA", "RegOpenKeyExA", "RegQueryValueExA", "RegSetValueExA",
    "ResumeThread", "SetFileAttributesA", "SetFilePointer", "SetUnhandledExceptionFilter",
    "SetWindowsHookExA", "ShellExecuteA", "Sleep", "SuspendThread", "TerminateProcess",
    "UnmapViewOfFile", "URLDownloadToFileA", "VirtualAlloc", "VirtualAllocEx", "VirtualFree",
    "VirtualProtect", "WaitForSingleObject", "WinExec", "WriteFile", "WriteProcessMemory", "WSAStartup",
    "accept", "bind", "closesocket", "connect", "gethostbyname", "htons", "inet_addr", "listen", "recv",
    "send", "socket", "lstrcatA", "lstrcmpA", "lstrcpyA", "lstrlenA", "memcpy", "memset", "strcmp",
    "strlen", "wsprintfA",
];

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub families: usize,
    /// Inclusive range of members per family.
    pub family_size_range: (usize, usize),
    /// Explicit member counts per family; overrides `families` and
    /// `family_size_range` when set.
    pub family_sizes: Option<Vec<usize>>,
    /// Inclusive range of base graph orders.
    pub base_order_range: (usize, usize),
    /// Base graphs get about `edge_factor * order` edges.
    pub edge_factor: f64,
    pub external_fraction: f64,
    pub mutations_per_generation: usize,
    /// Derive each member from the previous one instead of from the base.
    pub generational: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            families: 8,
            family_size_range: (3, 10),
            family_sizes: None,
            base_order_range: (30, 80),
            edge_factor: 2.1,
            external_fraction: 0.3,
            mutations_per_generation: 3,
            generational: false,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::Config(msg));
        match &self.family_sizes {
            Some(sizes) => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return fail("family_sizes must be non-empty and positive".into());
                }
            }
            None => {
                if self.families == 0 {
                    return fail("families must be positive".into());
                }
                let (lo, hi) = self.family_size_range;
                if lo == 0 || lo > hi {
                    return fail(format!("family_size_range ({lo}, {hi}) is empty or contains 0"));
                }
            }
        }
        let (lo, hi) = self.base_order_range;
        if lo == 0 || lo > hi {
            return fail(format!("base_order_range ({lo}, {hi}) is empty or contains 0"));
        }
        if !(self.edge_factor >= 0.0 && self.edge_factor.is_finite()) {
            return fail("edge_factor must be a non-negative number".into());
        }
        if !(0.0..=1.0).contains(&self.external_fraction) {
            return fail("external_fraction must lie in [0, 1]".into());
        }
        if external_count(hi, self.external_fraction) >= EXTERNAL_NAMES.len() {
            return fail(format!(
                "external_fraction {} at order {hi} needs more than {} external names",
                self.external_fraction,
                EXTERNAL_NAMES.len() - 1
            ));
        }
        Ok(())
    }

    fn sizes(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        match &self.family_sizes {
            Some(sizes) => sizes.clone(),
            None => {
                let (lo, hi) = self.family_size_range;
                (0..self.families).map(|_| rng.gen_range(lo..=hi)).collect()
            }
        }
    }
}

fn external_count(order: usize, fraction: f64) -> usize {
    // vertex 0 stays a local entry point
    ((order as f64 * fraction).round() as usize).min(order.saturating_sub(1))
}

/// Mutable working copy of a call graph.
#[derive(Debug, Clone)]
struct Draft {
    vertices: Vec<(String, FunctionKind)>,
    edges: BTreeSet<(usize, usize)>,
    next_local: u32,
}

impl Draft {
    fn from_graph(g: &CallGraph) -> Self {
        Draft {
            vertices: g.vertices().iter().map(|v| (v.name.clone(), v.kind)).collect(),
            edges: g.edges().iter().copied().collect(),
            next_local: g.order() as u32,
        }
    }

    fn fresh_local(&mut self) -> String {
        self.next_local += 1;
        format!("fn_{}", self.next_local)
    }

    fn locals(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].1 == FunctionKind::Local)
            .collect()
    }

    fn unused_external(&self, rng: &mut ChaCha8Rng) -> Option<&'static str> {
        let used: BTreeSet<&str> = self
            .vertices
            .iter()
            .filter(|v| v.1 == FunctionKind::External)
            .map(|v| v.0.as_str())
            .collect();
        EXTERNAL_NAMES.iter().copied().filter(|n| !used.contains(n)).choose(rng)
    }

    fn into_graph(self, label: &str) -> CallGraph {
        CallGraph::new(label, self.vertices, self.edges).expect("drafts keep graph invariants")
    }
}

/// Random base graph: a call tree rooted at local vertex 0, topped up with
/// random calls from local vertices to about `edge_factor * order` edges.
pub fn random_base_graph(label: &str, order: usize, edge_factor: f64, external_fraction: f64, rng: &mut ChaCha8Rng) -> CallGraph {
    let externals = external_count(order, external_fraction);
    let mut names: Vec<&str> = EXTERNAL_NAMES.choose_multiple(rng, externals).copied().collect();
    names.shuffle(rng);
    let mut kinds = vec![FunctionKind::Local; order - externals];
    kinds.extend(std::iter::repeat(FunctionKind::External).take(externals));
    kinds[1..].shuffle(rng);
    let mut vertices = Vec::with_capacity(order);
    for (i, kind) in kinds.iter().enumerate() {
        match kind {
            FunctionKind::Local => vertices.push((format!("fn_{i}"), FunctionKind::Local)),
            FunctionKind::External => vertices.push((names.pop().expect("counted").to_string(), FunctionKind::External)),
        }
    }
    let mut edges = BTreeSet::new();
    for v in 1..order {
        let callers: Vec<usize> = (0..v).filter(|&u| kinds[u] == FunctionKind::Local).collect();
        edges.insert((*callers.choose(rng).expect("vertex 0 is local"), v));
    }
    let locals = kinds.iter().filter(|&&k| k == FunctionKind::Local).count();
    let target = ((order as f64 * edge_factor).round() as usize).min(locals * order);
    let local_ids: Vec<usize> = (0..order).filter(|&u| kinds[u] == FunctionKind::Local).collect();
    while edges.len() < target {
        let s = *local_ids.choose(rng).expect("vertex 0 is local");
        edges.insert((s, rng.gen_range(0..order)));
    }
    CallGraph::new(label, vertices, edges).expect("generated graph is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EditOp {
    /// A new local function called from an existing local one (2 operations).
    InsertVertex,
    /// Removes a vertex and its incident edges (1 + degree operations).
    DeleteVertex,
    InsertEdge,
    DeleteEdge,
    /// Renames an external to an unused external name (cost 2).
    RelabelExternal,
}

const OPS: [EditOp; 5] = [
    EditOp::InsertVertex,
    EditOp::DeleteVertex,
    EditOp::InsertEdge,
    EditOp::DeleteEdge,
    EditOp::RelabelExternal,
];

/// Result of [`mutate`]: the edited graph, the operations applied and an
/// upper bound on the edit distance from the input.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub graph: CallGraph,
    pub ops: Vec<EditOp>,
    pub cost_bound: usize,
}

/// Applies `count` random edit operations. An operation that cannot apply
/// (no edge to delete, no external to rename, ...) is replaced by an edge
/// or vertex insertion.
pub fn mutate(g: &CallGraph, label: &str, count: usize, rng: &mut ChaCha8Rng) -> Mutation {
    let mut d = Draft::from_graph(g);
    let mut ops = Vec::with_capacity(count);
    let mut cost = 0;
    for _ in 0..count {
        let mut op = *OPS.choose(rng).expect("non-empty");
        let (applied, c) = loop {
            if let Some(c) = apply(&mut d, op, rng) {
                break (op, c);
            }
            op = if op == EditOp::InsertEdge { EditOp::InsertVertex } else { EditOp::InsertEdge };
        };
        ops.push(applied);
        cost += c;
    }
    Mutation {
        graph: d.into_graph(label),
        ops,
        cost_bound: cost,
    }
}

fn apply(d: &mut Draft, op: EditOp, rng: &mut ChaCha8Rng) -> Option<usize> {
    let n = d.vertices.len();
    match op {
        EditOp::InsertVertex => {
            let name = d.fresh_local();
            d.vertices.push((name, FunctionKind::Local));
            match d.locals().into_iter().filter(|&u| u != n).choose(rng) {
                Some(caller) => {
                    d.edges.insert((caller, n));
                    Some(2)
                }
                None => Some(1),
            }
        }
        EditOp::DeleteVertex => {
            if n <= 1 {
                return None;
            }
            // keep vertex 0 as the entry point
            let v = rng.gen_range(1..n);
            let degree = d.edges.iter().filter(|&&(s, t)| s == v || t == v).count();
            d.vertices.remove(v);
            let shift = |x: usize| if x > v { x - 1 } else { x };
            d.edges = d
                .edges
                .iter()
                .filter(|&&(s, t)| s != v && t != v)
                .map(|&(s, t)| (shift(s), shift(t)))
                .collect();
            Some(1 + degree)
        }
        EditOp::InsertEdge => {
            let locals = d.locals();
            let candidates = locals.len() * n - d.edges.iter().filter(|e| d.vertices[e.0].1 == FunctionKind::Local).count();
            if candidates == 0 {
                return None;
            }
            loop {
                let e = (*locals.choose(rng)?, rng.gen_range(0..n));
                if d.edges.insert(e) {
                    return Some(1);
                }
            }
        }
        EditOp::DeleteEdge => {
            let e = *d.edges.iter().choose(rng)?;
            d.edges.remove(&e);
            Some(1)
        }
        EditOp::RelabelExternal => {
            let v = (0..n).filter(|&i| d.vertices[i].1 == FunctionKind::External).choose(rng)?;
            let name = d.unused_external(rng)?;
            d.vertices[v].0 = name.to_string();
            Some(2)
        }
    }
}

/// Emitted copy of `g`: vertex order shuffled and local functions renamed
/// to random addresses, as a disassembler would.
fn disguise(g: &CallGraph, label: &str, rng: &mut ChaCha8Rng) -> CallGraph {
    let n = g.order();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut addresses = BTreeSet::new();
    while addresses.len() < n {
        addresses.insert(rng.gen_range(0x401000u32..0x4fffff));
    }
    let mut addresses: Vec<u32> = addresses.into_iter().collect();
    addresses.shuffle(rng);
    let mut vertices = vec![(String::new(), FunctionKind::Local); n];
    for (old, v) in g.vertices().iter().enumerate() {
        vertices[perm[old]] = match v.kind {
            FunctionKind::Local => (format!("sub_{:x}", addresses[old]), FunctionKind::Local),
            FunctionKind::External => (v.name.clone(), FunctionKind::External),
        };
    }
    let edges = g.edges().iter().map(|&(s, t)| (perm[s], perm[t]));
    CallGraph::new(label, vertices, edges).expect("relabelled copy is valid")
}

pub fn family_name(family: usize) -> String {
    format!("family{family:02}")
}

pub fn sample_label(family: usize, member: usize) -> String {
    format!("f{family:02}_s{member:02}")
}

/// Generates a corpus with family labels. Samples are ordered by family,
/// then member; the same configuration always yields the same corpus.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<GraphCorpus, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes = cfg.sizes(&mut rng);
    let (lo, hi) = cfg.base_order_range;
    let mut graphs = Vec::new();
    let mut families = BTreeMap::new();
    for (f, &size) in sizes.iter().enumerate() {
        let order = rng.gen_range(lo..=hi);
        let base = random_base_graph("base", order, cfg.edge_factor, cfg.external_fraction, &mut rng);
        let mut parent = base.clone();
        for m in 0..size {
            let label = sample_label(f, m);
            let member = mutate(&parent, &label, cfg.mutations_per_generation, &mut rng).graph;
            if cfg.generational {
                parent = member.clone();
            }
            graphs.push(disguise(&member, &label, &mut rng));
            families.insert(label, family_name(f));
        }
    }
    Ok(GraphCorpus::new(graphs, Some(families))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ged::{exact_min_ged, pair_similarity, AnnealConfig, SimilarityScore};
    use crate::graph::validate_conventions;

    #[test]
    fn defaults_validate() {
        SynthConfig::default().validate().unwrap();
        let bad = SynthConfig {
            family_size_range: (4, 2),
            ..SynthConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SynthConfig {
            external_fraction: 1.5,
            ..SynthConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SynthConfig {
            family_sizes: Some(vec![3, 0]),
            ..SynthConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn base_graph_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_base_graph("b", 50, 2.1, 0.3, &mut rng);
        assert_eq!(g.order(), 50);
        assert_eq!(g.size(), 105);
        assert_eq!(g.vertices().iter().filter(|v| v.is_external()).count(), 15);
        assert!(validate_conventions(&g).is_empty());
        // externals never call anything
        for &(s, _) in g.edges() {
            assert!(!g.vertex(s).is_external());
        }
    }

    #[test]
    fn deterministic_and_well_formed() {
        let cfg = SynthConfig::default().with_seed(11);
        let a = generate_corpus(&cfg).unwrap();
        let b = generate_corpus(&cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_corpus(&cfg.clone().with_seed(12)).unwrap());
        let fam = a.family_labels().unwrap();
        assert_eq!(fam.values().collect::<BTreeSet<_>>().len(), 8);
        for g in a.graphs() {
            assert!(validate_conventions(g).is_empty(), "{}", g.label());
        }
    }

    #[test]
    fn explicit_family_sizes() {
        let cfg = SynthConfig {
            family_sizes: Some(vec![2, 1, 4]),
            base_order_range: (5, 6),
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(c.family_of("f02_s03"), Some("family02"));
    }

    #[test]
    fn unmutated_members_coincide() {
        let cfg = SynthConfig {
            families: 2,
            family_size_range: (3, 3),
            base_order_range: (5, 5),
            mutations_per_generation: 0,
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        let g = c.graphs();
        let s: SimilarityScore<f64> = exact_min_ged(&g[0], &g[1], 12).unwrap();
        assert_eq!(s.sigma, 0.0);
        // local names differ even though the structure is the same
        assert_ne!(g[0], g[1].clone().with_label(g[0].label()));
    }

    #[test]
    fn mutation_cost_bounds_exact_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let order = rng.gen_range(1..=5);
            let base = random_base_graph("b", order, 1.5, 0.4, &mut rng);
            let count = rng.gen_range(0..=3);
            let m = mutate(&base, "m", count, &mut rng);
            prop_bound(&base, &m, trial);
        }
    }

    fn prop_bound(base: &CallGraph, m: &Mutation, trial: usize) {
        if base.order() + m.graph.order() > 12 {
            return;
        }
        let s: SimilarityScore<f64> = exact_min_ged(base, &m.graph, 12).unwrap();
        assert!(s.breakdown.total <= m.cost_bound, "trial {trial}: {:?} {} > {}", m.ops, s.breakdown.total, m.cost_bound);
    }

    #[test]
    fn families_separate() {
        let cfg = SynthConfig {
            families: 2,
            family_size_range: (3, 3),
            base_order_range: (20, 20),
            mutations_per_generation: 2,
            seed: 4,
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        let g = c.graphs();
        let acfg = AnnealConfig::default();
        let sigma = |i: usize, j: usize| pair_similarity::<f64>(&g[i], &g[j], &acfg);
        let within = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)].map(|(i, j)| sigma(i, j));
        let across: Vec<f64> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).map(|(i, j)| sigma(i, j)).collect();
        let max_within = within.iter().copied().fold(0.0, f64::max);
        let min_across = across.iter().copied().fold(1.0, f64::min);
        assert!(max_within < min_across, "{max_within} vs {min_across}");
    }

    #[test]
    fn generational_drift() {
        let cfg = SynthConfig {
            families: 1,
            family_size_range: (10, 10),
            base_order_range: (20, 20),
            mutations_per_generation: 2,
            generational: true,
            seed: 9,
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        let g = c.graphs();
        let acfg = AnnealConfig::default();
        let sigma = |i: usize, j: usize| pair_similarity::<f64>(&g[i], &g[j], &acfg);
        let steps: f64 = (0..9).map(|i| sigma(i, i + 1)).sum::<f64>() / 9.0;
        assert!(sigma(0, 9) > steps, "{} vs {steps}", sigma(0, 9));
    }
}
