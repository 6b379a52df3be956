//! Graph matchings, unit-cost edit distance and the normalized similarity
//! score between two call graphs.
//!
//! A matching is a bijection between the vertex sets of `G` and `H`, each
//! padded with dummy vertices up to `|V(G)| + |V(H)|`. A vertex matched to a
//! dummy is deleted (or inserted, seen from the other side). For a matching
//! the edit distance is
//!
//! ```text
//! vertex_cost  = number of real vertices matched to a dummy
//! edge_cost    = |E(G)| + |E(H)| - 2 * |{(i,j) in E(G) : (m(i), m(j)) in E(H)}|
//! relabel_cost = number of external vertices (either side) matched to a real
//!                vertex that is not the identically named external
//! ```
//!
//! and the similarity score divides the total by `|V(G)|+|V(H)|+|E(G)|+|E(H)|`,
//! so 0 means identical and 1 means nothing in common.

mod anneal;
mod config;
mod exact;
mod matching;
mod problem;

pub use anneal::anneal_match;
pub use config::AnnealConfig;
pub use exact::{exact_min_ged, DEFAULT_EXACT_MAX_ORDER};
pub use matching::{parse_matching, Matching};

use crate::graph::CallGraph;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GedError {
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("matching was built for graphs of order ({expected_left}, {expected_right}), got ({left}, {right})")]
    GraphMismatch {
        expected_left: usize,
        expected_right: usize,
        left: usize,
        right: usize,
    },
    #[error("combined order {combined} exceeds the exact matcher limit {limit}")]
    SizeLimit { combined: usize, limit: usize },
    #[error("invalid annealing configuration: {0}")]
    Config(String),
}

/// Edit distance of one matching, split by operation type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct CostBreakdown {
    pub vertex_cost: usize,
    pub edge_cost: usize,
    pub relabel_cost: usize,
    pub total: usize,
}

impl CostBreakdown {
    pub fn new(vertex_cost: usize, edge_cost: usize, relabel_cost: usize) -> Self {
        CostBreakdown {
            vertex_cost,
            edge_cost,
            relabel_cost,
            total: vertex_cost + edge_cost + relabel_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScore<F> {
    pub sigma: F,
    pub breakdown: CostBreakdown,
    pub matching: Matching,
}

impl<F: Scalar> SimilarityScore<F> {
    pub(crate) fn from_parts(breakdown: CostBreakdown, matching: Matching, g: &CallGraph, h: &CallGraph) -> Self {
        SimilarityScore {
            sigma: similarity(&breakdown, g, h),
            breakdown,
            matching,
        }
    }
}

fn check_graphs(m: &Matching, g: &CallGraph, h: &CallGraph) -> Result<(), GedError> {
    if m.left_order() != g.order() || m.right_order() != h.order() {
        return Err(GedError::GraphMismatch {
            expected_left: m.left_order(),
            expected_right: m.right_order(),
            left: g.order(),
            right: h.order(),
        });
    }
    Ok(())
}

/// Number of pairs with exactly one dummy side.
pub fn vertex_cost(m: &Matching) -> usize {
    m.pairs()
        .iter()
        .filter(|(l, r)| l.is_none() != r.is_none())
        .count()
}

pub fn edge_cost(m: &Matching, g: &CallGraph, h: &CallGraph) -> Result<usize, GedError> {
    check_graphs(m, g, h)?;
    let forward = m.forward();
    let preserved = g
        .edges()
        .iter()
        .filter(|&&(i, j)| match (forward[i], forward[j]) {
            (Some(x), Some(y)) => h.has_edge(x, y),
            _ => false,
        })
        .count();
    Ok(g.size() + h.size() - 2 * preserved)
}

/// Relabel charge for one matched pair of real vertices.
pub(crate) fn pair_relabel_cost(g: &CallGraph, left: usize, h: &CallGraph, right: usize) -> usize {
    let (a, b) = (g.vertex(left), h.vertex(right));
    match (a.is_external(), b.is_external()) {
        (true, true) if a.name == b.name => 0,
        (true, true) => 2,
        (true, false) | (false, true) => 1,
        (false, false) => 0,
    }
}

pub fn relabel_cost(m: &Matching, g: &CallGraph, h: &CallGraph) -> Result<usize, GedError> {
    check_graphs(m, g, h)?;
    Ok(m.pairs()
        .iter()
        .map(|&(l, r)| match (l, r) {
            (Some(l), Some(r)) => pair_relabel_cost(g, l, h, r),
            _ => 0,
        })
        .sum())
}

pub fn edit_distance(m: &Matching, g: &CallGraph, h: &CallGraph) -> Result<CostBreakdown, GedError> {
    Ok(CostBreakdown::new(
        vertex_cost(m),
        edge_cost(m, g, h)?,
        relabel_cost(m, g, h)?,
    ))
}

/// Normalized edit distance in `[0, 1]`. Two null graphs score 0.
pub fn similarity<F: Scalar>(breakdown: &CostBreakdown, g: &CallGraph, h: &CallGraph) -> F {
    let denominator = g.order() + h.order() + g.size() + h.size();
    if denominator == 0 {
        return F::zero();
    }
    F::ratio(breakdown.total, denominator)
}

/// Symmetrized score: the better of matching `g` onto `h` and `h` onto `g`.
/// Pairs small enough for exhaustive search are solved exactly, and graphs
/// that coincide vertex by vertex (up to local names) score 0 directly.
pub fn pair_score<F: Scalar>(g: &CallGraph, h: &CallGraph, cfg: &AnnealConfig) -> SimilarityScore<F> {
    if let Some(score) = aligned_copy(g, h) {
        return score;
    }
    if g.order() + h.order() <= cfg.exact_max_order {
        if let Ok(score) = exact_min_ged(g, h, cfg.exact_max_order) {
            return score;
        }
    }
    let forward: SimilarityScore<F> = anneal_match(g, h, cfg);
    let backward: SimilarityScore<F> = anneal_match(h, g, cfg);
    if backward.breakdown.total < forward.breakdown.total {
        SimilarityScore {
            sigma: backward.sigma,
            breakdown: backward.breakdown,
            matching: backward.matching.inverse(),
        }
    } else {
        forward
    }
}

/// Zero-cost score when matching vertex `i` of `g` to vertex `i` of `h`
/// changes nothing.
fn aligned_copy<F: Scalar>(g: &CallGraph, h: &CallGraph) -> Option<SimilarityScore<F>> {
    if g.order() != h.order() || g.edges() != h.edges() {
        return None;
    }
    let matching = Matching::new(g, h, (0..g.order()).map(|i| (Some(i), Some(i))).collect()).ok()?;
    let breakdown = edit_distance(&matching, g, h).ok()?;
    (breakdown.total == 0).then(|| SimilarityScore::from_parts(breakdown, matching, g, h))
}

pub fn pair_similarity<F: Scalar>(g: &CallGraph, h: &CallGraph, cfg: &AnnealConfig) -> F {
    pair_score(g, h, cfg).sigma
}
