//! Dense working representation of one matching instance.
//!
//! An assignment is a permutation `fwd` of `0..n` with `n = |V(G)| + |V(H)|`:
//! left slot `l` is vertex `l` of `G` when `l < |V(G)|` and a dummy otherwise;
//! right slot `r` is vertex `r` of `H` when `r < |V(H)|` and a dummy otherwise.

use std::collections::HashMap;

use super::{CostBreakdown, Matching};
use crate::graph::CallGraph;

pub(crate) struct PairProblem<'a> {
    pub g: &'a CallGraph,
    pub h: &'a CallGraph,
    pub ng: usize,
    pub nh: usize,
    g_ext: Vec<Option<u32>>,
    h_ext: Vec<Option<u32>>,
    h_adj: Vec<u64>,
    words_per_row: usize,
}

impl<'a> PairProblem<'a> {
    pub fn new(g: &'a CallGraph, h: &'a CallGraph) -> Self {
        let mut names: HashMap<&str, u32> = HashMap::new();
        let mut intern = |graph: &'a CallGraph| -> Vec<Option<u32>> {
            graph
                .vertices()
                .iter()
                .map(|v| {
                    v.is_external().then(|| {
                        let next = names.len() as u32;
                        *names.entry(v.name.as_str()).or_insert(next)
                    })
                })
                .collect()
        };
        let g_ext = intern(g);
        let h_ext = intern(h);
        let nh = h.order();
        let words_per_row = nh.div_ceil(64);
        let mut h_adj = vec![0u64; nh * words_per_row];
        for &(s, t) in h.edges() {
            h_adj[s * words_per_row + t / 64] |= 1 << (t % 64);
        }
        PairProblem {
            g,
            h,
            ng: g.order(),
            nh,
            g_ext,
            h_ext,
            h_adj,
            words_per_row,
        }
    }

    pub fn slots(&self) -> usize {
        self.ng + self.nh
    }

    #[inline]
    pub fn h_edge(&self, s: usize, t: usize) -> bool {
        self.h_adj[s * self.words_per_row + t / 64] >> (t % 64) & 1 == 1
    }

    #[inline]
    pub fn relabel(&self, l: usize, r: usize) -> usize {
        match (self.g_ext[l], self.h_ext[r]) {
            (Some(a), Some(b)) if a == b => 0,
            (Some(_), Some(_)) => 2,
            (Some(_), None) | (None, Some(_)) => 1,
            (None, None) => 0,
        }
    }

    /// Vertex plus relabel cost of matching left slot `l` to right slot `r`.
    #[inline]
    pub fn node_cost(&self, l: usize, r: usize) -> usize {
        match (l < self.ng, r < self.nh) {
            (true, true) => self.relabel(l, r),
            (false, false) => 0,
            _ => 1,
        }
    }

    /// Pairs of identically named externals, in left vertex order.
    pub fn common_externals(&self) -> Vec<(usize, usize)> {
        let by_name: HashMap<u32, usize> = self
            .h_ext
            .iter()
            .enumerate()
            .filter_map(|(r, e)| e.map(|e| (e, r)))
            .collect();
        self.g_ext
            .iter()
            .enumerate()
            .filter_map(|(l, e)| e.and_then(|e| by_name.get(&e).map(|&r| (l, r))))
            .collect()
    }

    #[inline]
    fn preserved(&self, fwd: &[usize], u: usize, v: usize) -> bool {
        let (x, y) = (fwd[u], fwd[v]);
        x < self.nh && y < self.nh && self.h_edge(x, y)
    }

    pub fn preserved_edges(&self, fwd: &[usize]) -> usize {
        self.g
            .edges()
            .iter()
            .filter(|&&(u, v)| self.preserved(fwd, u, v))
            .count()
    }

    pub fn breakdown(&self, fwd: &[usize]) -> CostBreakdown {
        let mut vertex = 0;
        let mut relabel = 0;
        for (l, &r) in fwd.iter().enumerate() {
            match (l < self.ng, r < self.nh) {
                (true, true) => relabel += self.relabel(l, r),
                (false, false) => {}
                _ => vertex += 1,
            }
        }
        let edge = self.g.size() + self.h.size() - 2 * self.preserved_edges(fwd);
        CostBreakdown::new(vertex, edge, relabel)
    }

    pub fn total(&self, fwd: &[usize]) -> usize {
        self.breakdown(fwd).total
    }

    /// Preserved edges of `G` incident to left slots `a` or `b`, each edge
    /// counted once.
    fn preserved_around(&self, fwd: &[usize], a: usize, b: usize) -> usize {
        let mut count = 0;
        if a < self.ng {
            for &v in self.g.successors(a) {
                count += usize::from(self.preserved(fwd, a, v));
            }
            for &u in self.g.predecessors(a) {
                if u != a {
                    count += usize::from(self.preserved(fwd, u, a));
                }
            }
        }
        if b < self.ng {
            for &v in self.g.successors(b) {
                if v != a {
                    count += usize::from(self.preserved(fwd, b, v));
                }
            }
            for &u in self.g.predecessors(b) {
                if u != a && u != b {
                    count += usize::from(self.preserved(fwd, u, b));
                }
            }
        }
        count
    }

    /// Swaps the right partners of left slots `a` and `b` and returns the
    /// change in total cost. Only edges incident to `a` or `b` are visited.
    pub fn swap(&self, fwd: &mut [usize], a: usize, b: usize) -> isize {
        let (ra, rb) = (fwd[a], fwd[b]);
        let node_before = self.node_cost(a, ra) + self.node_cost(b, rb);
        let node_after = self.node_cost(a, rb) + self.node_cost(b, ra);
        let before = self.preserved_around(fwd, a, b);
        fwd.swap(a, b);
        let after = self.preserved_around(fwd, a, b);
        node_after as isize - node_before as isize - 2 * (after as isize - before as isize)
    }

    pub fn to_matching(&self, fwd: &[usize]) -> Matching {
        let pairs = fwd
            .iter()
            .enumerate()
            .filter(|&(l, &r)| l < self.ng || r < self.nh)
            .map(|(l, &r)| ((l < self.ng).then_some(l), (r < self.nh).then_some(r)))
            .collect();
        Matching::new(self.g, self.h, pairs).expect("assignment is a permutation")
    }

    /// Lower bound on any matching's cost: order and size differences.
    pub fn lower_bound(&self) -> usize {
        self.ng.abs_diff(self.nh) + self.g.size().abs_diff(self.h.size())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ged::edit_distance;
    use crate::graph::FunctionKind;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, label: &str, n: usize) -> CallGraph {
        let vertices: Vec<_> = (0..n)
            .map(|i| {
                if rng.gen_bool(0.4) {
                    (format!("Api{}", rng.gen_range(0..6)), FunctionKind::External)
                } else {
                    (format!("sub_{i}"), FunctionKind::Local)
                }
            })
            .collect();
        // drop repeated external names
        let mut seen = std::collections::HashSet::new();
        let vertices: Vec<_> = vertices
            .into_iter()
            .enumerate()
            .map(|(i, (name, kind))| {
                if kind == FunctionKind::External && !seen.insert(name.clone()) {
                    (format!("sub_{i}"), FunctionKind::Local)
                } else {
                    (name, kind)
                }
            })
            .collect();
        let m = if n == 0 { 0 } else { rng.gen_range(0..=2 * n) };
        let edges: Vec<_> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        CallGraph::new(label, vertices, edges).unwrap()
    }

    proptest! {
        #[test]
        fn swap_delta_matches_full_recompute(seed in any::<u64>(), ng in 0usize..9, nh in 0usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, "g", ng);
            let h = random_graph(&mut rng, "h", nh);
            let p = PairProblem::new(&g, &h);
            let n = p.slots();
            prop_assume!(n >= 2);
            let mut fwd: Vec<usize> = (0..n).collect();
            fwd.shuffle(&mut rng);
            let mut cost = p.total(&fwd) as isize;
            for _ in 0..30 {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a { b += 1; }
                cost += p.swap(&mut fwd, a, b);
                prop_assert_eq!(cost, p.total(&fwd) as isize);
            }
            // the dense breakdown agrees with the public cost functions
            let m = p.to_matching(&fwd);
            prop_assert_eq!(edit_distance(&m, &g, &h).unwrap(), p.breakdown(&fwd));
        }
    }
}
