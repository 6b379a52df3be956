use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::problem::PairProblem;
use super::{AnnealConfig, SimilarityScore};
use crate::graph::CallGraph;
use crate::scalar::Scalar;

/// Two-stage simulated annealing matcher.
///
/// Stage one matches every external function that occurs under the same
/// name in both graphs; these pairs never move. Stage two completes the
/// matching over the remaining vertices and dummies and anneals over moves
/// that swap the partners of two free left vertices. The best matching seen
/// over all restarts is returned. The result depends only on the graphs and
/// `cfg`.
pub fn anneal_match<F: Scalar>(g: &CallGraph, h: &CallGraph, cfg: &AnnealConfig) -> SimilarityScore<F> {
    let problem = PairProblem::new(g, h);
    let fwd = Annealer::new(&problem, cfg).run();
    let breakdown = problem.breakdown(&fwd);
    SimilarityScore::from_parts(breakdown, problem.to_matching(&fwd), g, h)
}

/// Consecutive temperature levels without a cost-changing move after which
/// cooling stops early.
const FROZEN_LEVELS: usize = 25;

struct Annealer<'p, 'g> {
    p: &'p PairProblem<'g>,
    cfg: &'p AnnealConfig,
    rng: ChaCha8Rng,
    /// Left slots that take part in the search.
    free_left: Vec<usize>,
    /// Right slots available to `free_left`, same length.
    free_right: Vec<usize>,
    /// Assignment with pinned pairs and surplus dummy pairs filled in.
    template: Vec<usize>,
}

impl<'p, 'g> Annealer<'p, 'g> {
    fn new(p: &'p PairProblem<'g>, cfg: &'p AnnealConfig) -> Self {
        let (ng, nh) = (p.ng, p.nh);
        let pinned = p.common_externals();
        let k = pinned.len();
        let mut template = vec![usize::MAX; p.slots()];
        let mut left_pinned = vec![false; ng];
        let mut right_pinned = vec![false; nh];
        for &(l, r) in &pinned {
            template[l] = r;
            left_pinned[l] = true;
            right_pinned[r] = true;
        }
        // nh - k left dummies can absorb every free H vertex; the remaining
        // k left dummies pair with the k surplus right dummies.
        let mut free_left: Vec<usize> = (0..ng).filter(|&l| !left_pinned[l]).collect();
        free_left.extend(ng..ng + nh - k);
        let mut free_right: Vec<usize> = (0..nh).filter(|&r| !right_pinned[r]).collect();
        free_right.extend(nh..nh + ng - k);
        for i in 0..k {
            template[ng + nh - k + i] = nh + ng - k + i;
        }
        Annealer {
            p,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            free_left,
            free_right,
            template,
        }
    }

    fn run(mut self) -> Vec<usize> {
        let lower_bound = self.p.lower_bound();
        let mut best = self.random_completion();
        let mut best_cost = self.p.total(&best);
        for restart in 0..self.cfg.restarts {
            if best_cost == lower_bound {
                break;
            }
            let start = if restart == 0 && self.cfg.structural_seed {
                self.structural_completion()
            } else if restart == 0 {
                best.clone()
            } else {
                self.random_completion()
            };
            let (fwd, cost) = self.anneal(start, lower_bound);
            if cost < best_cost {
                best = fwd;
                best_cost = cost;
            }
        }
        best
    }

    fn random_completion(&mut self) -> Vec<usize> {
        let mut fwd = self.template.clone();
        let mut rights = self.free_right.clone();
        rights.shuffle(&mut self.rng);
        for (&l, &r) in self.free_left.iter().zip(&rights) {
            fwd[l] = r;
        }
        fwd
    }

    /// Greedy completion that repeatedly matches the free pair preserving
    /// the most edges towards already matched vertices, preferring cheap
    /// node costs and similar degrees.
    fn structural_completion(&mut self) -> Vec<usize> {
        let p = self.p;
        let (g, h) = (p.g, p.h);
        let (ng, nh) = (p.ng, p.nh);
        let mut fwd = self.template.clone();
        let mut g_free: Vec<bool> = (0..ng).map(|l| fwd[l] == usize::MAX).collect();
        let mut h_free = vec![true; nh];
        for l in 0..ng {
            if !g_free[l] {
                h_free[fwd[l]] = false;
            }
        }
        let mut score = vec![0i64; ng * nh];
        let bump = |score: &mut Vec<i64>, g_free: &[bool], h_free: &[bool], u: usize, v: usize| {
            for &x in g.successors(u) {
                if g_free[x] {
                    for &y in h.successors(v) {
                        if h_free[y] {
                            score[x * nh + y] += 1;
                        }
                    }
                }
            }
            for &x in g.predecessors(u) {
                if g_free[x] {
                    for &y in h.predecessors(v) {
                        if h_free[y] {
                            score[x * nh + y] += 1;
                        }
                    }
                }
            }
        };
        for l in 0..ng {
            if !g_free[l] {
                bump(&mut score, &g_free, &h_free, l, fwd[l]);
            }
        }
        let g_deg: Vec<usize> = (0..ng).map(|v| g.degree(v)).collect();
        let h_deg: Vec<usize> = (0..nh).map(|v| h.degree(v)).collect();

        let mut g_left: Vec<usize> = (0..ng).filter(|&l| g_free[l]).collect();
        let mut h_left: Vec<usize> = (0..nh).filter(|&r| h_free[r]).collect();
        while !g_left.is_empty() && !h_left.is_empty() {
            let mut pick = (0usize, 0usize);
            let mut pick_key = (i64::MIN, i64::MIN);
            for (gi, &x) in g_left.iter().enumerate() {
                for (hi, &y) in h_left.iter().enumerate() {
                    let loops = i64::from(g.has_edge(x, x) && h.has_edge(y, y));
                    let gain = 2 * (score[x * nh + y] + loops) - p.node_cost(x, y) as i64;
                    let key = (gain, -(g_deg[x].abs_diff(h_deg[y]) as i64));
                    if key > pick_key {
                        pick_key = key;
                        pick = (gi, hi);
                    }
                }
            }
            let x = g_left.remove(pick.0);
            let y = h_left.remove(pick.1);
            fwd[x] = y;
            g_free[x] = false;
            h_free[y] = false;
            bump(&mut score, &g_free, &h_free, x, y);
        }

        // leftovers go to the free dummies; spare dummies pair with each other
        let k = self.template[..ng].iter().filter(|&&r| r != usize::MAX).count();
        let mut right_dummies = nh..nh + ng - k;
        for &x in &g_left {
            fwd[x] = right_dummies.next().expect("one free right dummy per free G vertex");
        }
        let mut partners = h_left.into_iter().chain(right_dummies);
        for l in ng..ng + nh - k {
            fwd[l] = partners.next().expect("augmented sets have equal size");
        }
        debug_assert!(is_permutation(&fwd));
        fwd
    }

    fn anneal(&mut self, mut fwd: Vec<usize>, lower_bound: usize) -> (Vec<usize>, usize) {
        let p = self.p;
        let m = self.free_left.len();
        let mut cost = p.total(&fwd) as isize;
        let mut best = fwd.clone();
        let mut best_cost = cost;
        if m < 2 {
            return (best, best_cost as usize);
        }
        let steps = self.cfg.steps_per_temperature.unwrap_or(8 * m);
        let mut temperature = self.cfg.initial_temperature * (cost.max(1) as f64);
        let mut still_levels = 0;
        'cooling: while temperature > self.cfg.minimum_temperature {
            let mut moved = false;
            for _ in 0..steps {
                let i = self.rng.gen_range(0..m);
                let mut j = self.rng.gen_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                let (a, b) = (self.free_left[i], self.free_left[j]);
                let delta = p.swap(&mut fwd, a, b);
                let accept = delta <= 0 || self.rng.gen::<f64>() < (-(delta as f64) / temperature).exp();
                if !accept {
                    fwd.swap(a, b);
                    continue;
                }
                cost += delta;
                moved |= delta != 0;
                if cost < best_cost {
                    best_cost = cost;
                    best.copy_from_slice(&fwd);
                    if best_cost as usize == lower_bound {
                        break 'cooling;
                    }
                }
            }
            // frozen: the remaining levels would only repeat greedy moves
            // that the final descent covers
            still_levels = if moved { 0 } else { still_levels + 1 };
            if still_levels == FROZEN_LEVELS {
                break;
            }
            temperature *= self.cfg.cooling_factor;
        }
        let best_cost = self.descend(&mut best, best_cost);
        (best, best_cost as usize)
    }

    /// First-improvement pairwise-swap descent to a local minimum.
    fn descend(&self, fwd: &mut [usize], mut cost: isize) -> isize {
        let m = self.free_left.len();
        loop {
            let mut improved = false;
            for i in 0..m {
                for j in i + 1..m {
                    let (a, b) = (self.free_left[i], self.free_left[j]);
                    let delta = self.p.swap(fwd, a, b);
                    if delta < 0 {
                        cost += delta;
                        improved = true;
                    } else {
                        fwd.swap(a, b);
                    }
                }
            }
            if !improved {
                return cost;
            }
        }
    }
}

fn is_permutation(fwd: &[usize]) -> bool {
    let mut seen = vec![false; fwd.len()];
    fwd.iter().all(|&r| r < seen.len() && !std::mem::replace(&mut seen[r], true))
}
