use super::problem::PairProblem;
use super::{edit_distance, GedError, Matching, SimilarityScore};
use crate::graph::CallGraph;
use crate::scalar::Scalar;

/// Default limit on `|V(G)| + |V(H)|` for exhaustive search.
pub const DEFAULT_EXACT_MAX_ORDER: usize = 12;

/// Minimum edit distance by exhaustive search.
///
/// Each vertex of `G` is assigned either a distinct vertex of `H` or a
/// dummy; unassigned `H` vertices are inserted. This enumerates every
/// augmented bijection up to permutations among dummies, with
/// branch-and-bound pruning. Ties keep the first matching found.
pub fn exact_min_ged<F: Scalar>(
    g: &CallGraph,
    h: &CallGraph,
    max_order: usize,
) -> Result<SimilarityScore<F>, GedError> {
    let combined = g.order() + h.order();
    if combined > max_order {
        return Err(GedError::SizeLimit {
            combined,
            limit: max_order,
        });
    }
    let problem = PairProblem::new(g, h);
    // edges_from[v]: edges of G whose larger endpoint is >= v
    let mut edges_from = vec![0usize; g.order() + 1];
    for &(s, t) in g.edges() {
        edges_from[s.max(t)] += 1;
    }
    for v in (0..g.order()).rev() {
        edges_from[v] += edges_from[v + 1];
    }
    let mut search = Search {
        p: &problem,
        edges_from,
        image: vec![None; g.order()],
        used: vec![false; h.order()],
        best_cost: usize::MAX,
        best: Vec::new(),
    };
    search.descend(0, 0, 0, 0);

    let mut pairs: Vec<_> = search.best.iter().enumerate().map(|(l, &r)| (Some(l), r)).collect();
    let mut matched = vec![false; h.order()];
    for r in search.best.iter().flatten() {
        matched[*r] = true;
    }
    pairs.extend((0..h.order()).filter(|&r| !matched[r]).map(|r| (None, Some(r))));
    let matching = Matching::new(g, h, pairs)?;
    let breakdown = edit_distance(&matching, g, h)?;
    debug_assert_eq!(breakdown.total, search.best_cost);
    Ok(SimilarityScore::from_parts(breakdown, matching, g, h))
}

struct Search<'p, 'g> {
    p: &'p PairProblem<'g>,
    edges_from: Vec<usize>,
    image: Vec<Option<usize>>,
    used: Vec<bool>,
    best_cost: usize,
    best: Vec<Option<usize>>,
}

impl Search<'_, '_> {
    fn descend(&mut self, v: usize, node: usize, preserved: usize, used: usize) {
        let (ng, nh) = (self.p.ng, self.p.nh);
        let (eg, eh) = (self.p.g.size(), self.p.h.size());
        if v == ng {
            let total = node + (nh - used) + eg + eh - 2 * preserved;
            if total < self.best_cost {
                self.best_cost = total;
                self.best = self.image.clone();
            }
            return;
        }
        let forced_inserts = (nh - used).saturating_sub(ng - v);
        let max_preserved = (preserved + self.edges_from[v]).min(eh);
        let bound = node + forced_inserts + eg + eh - 2 * max_preserved;
        if bound >= self.best_cost {
            return;
        }
        for r in 0..nh {
            if self.used[r] {
                continue;
            }
            let gained = self.gained(v, r);
            self.used[r] = true;
            self.image[v] = Some(r);
            self.descend(v + 1, node + self.p.node_cost(v, r), preserved + gained, used + 1);
            self.used[r] = false;
        }
        self.image[v] = None;
        self.descend(v + 1, node + 1, preserved, used);
    }

    /// Edges between `v` and already assigned vertices preserved by `v -> r`.
    fn gained(&self, v: usize, r: usize) -> usize {
        let g = self.p.g;
        let mut gained = 0;
        for &w in g.successors(v) {
            if w == v {
                gained += usize::from(self.p.h_edge(r, r));
            } else if w < v {
                if let Some(x) = self.image[w] {
                    gained += usize::from(self.p.h_edge(r, x));
                }
            }
        }
        for &u in g.predecessors(v) {
            if u < v {
                if let Some(y) = self.image[u] {
                    gained += usize::from(self.p.h_edge(y, r));
                }
            }
        }
        gained
    }
}
