use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::init::{plusplus_indices, random_indices, trained_indices};
use super::{ClusterError, Clustering};
use crate::scalar::Scalar;
use crate::simmatrix::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Random,
    PlusPlus,
    /// Explicit medoid labels, one per cluster.
    Trained(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMedoidsConfig {
    pub k: usize,
    pub init: Init,
    pub max_iterations: usize,
    pub seed: u64,
}

impl KMedoidsConfig {
    pub fn new(k: usize, init: Init) -> Self {
        KMedoidsConfig {
            k,
            init,
            max_iterations: 100,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMedoidsResult<F> {
    pub clustering: Clustering,
    /// Objective after the initial assignment and after every iteration.
    pub trace: Vec<F>,
    pub iterations: usize,
    /// False when `max_iterations` ran out while the objective still fell.
    pub converged: bool,
}

impl<F: Scalar> KMedoidsResult<F> {
    pub fn objective(&self) -> F {
        *self.trace.last().expect("trace holds the initial objective")
    }
}

/// Sum of dissimilarities from each clustered sample to its cluster medoid.
pub fn objective<F: Scalar>(matrix: &DistanceMatrix<F>, clustering: &Clustering) -> Option<F> {
    let medoids = clustering.medoids()?;
    Some(
        clustering
            .assignment()
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| matrix.get(i, medoids[c])))
            .sum(),
    )
}

/// k-medoids by alternating assignment and medoid update.
///
/// Each sample joins the cluster of its most similar medoid (lowest cluster
/// id on ties; a medoid always stays in its own cluster), then every medoid
/// moves to the member with the smallest summed dissimilarity to the rest of
/// its cluster (lowest sample index on ties). Iteration stops as soon as the
/// objective fails to decrease, or after `max_iterations`; a non-improving
/// update is discarded, so the trace is non-increasing.
pub fn kmedoids<F: Scalar>(matrix: &DistanceMatrix<F>, cfg: &KMedoidsConfig) -> Result<KMedoidsResult<F>, ClusterError> {
    let n = matrix.len();
    if cfg.k == 0 || cfg.k > n {
        return Err(ClusterError::Config(format!("k = {} must lie in 1..={n}", cfg.k)));
    }
    if cfg.max_iterations == 0 {
        return Err(ClusterError::Config("max_iterations must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut medoids = match &cfg.init {
        Init::Random => random_indices(n, cfg.k, &mut rng),
        Init::PlusPlus => plusplus_indices(matrix, cfg.k, &mut rng),
        Init::Trained(labels) => {
            if labels.len() != cfg.k {
                return Err(ClusterError::Config(format!(
                    "trained initialization lists {} medoids for k = {}",
                    labels.len(),
                    cfg.k
                )));
            }
            trained_indices(matrix, labels)?
        }
    };

    let mut assignment = assign(matrix, &medoids);
    let mut trace = vec![cost(matrix, &medoids, &assignment)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut next = medoids.clone();
        update_medoids(matrix, &mut next, &assignment);
        let next_assignment = assign(matrix, &next);
        let current = cost(matrix, &next, &next_assignment);
        let previous = *trace.last().expect("non-empty trace");
        if current >= previous {
            // keep the last state; a rounding-level rise is not accepted
            trace.push(previous);
            converged = true;
            break;
        }
        trace.push(current);
        medoids = next;
        assignment = next_assignment;
    }

    let labels = matrix.labels().to_vec();
    let clustering = Clustering::new(labels, assignment.into_iter().map(Some).collect(), Some(medoids))?;
    Ok(KMedoidsResult {
        clustering,
        trace,
        iterations,
        converged,
    })
}

fn assign<F: Scalar>(matrix: &DistanceMatrix<F>, medoids: &[usize]) -> Vec<usize> {
    (0..matrix.len())
        .map(|i| {
            if let Some(own) = medoids.iter().position(|&m| m == i) {
                return own;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                if matrix.get(i, medoids[c]) < matrix.get(i, medoids[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn cost<F: Scalar>(matrix: &DistanceMatrix<F>, medoids: &[usize], assignment: &[usize]) -> F {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| matrix.get(i, medoids[c]))
        .sum()
}

fn update_medoids<F: Scalar>(matrix: &DistanceMatrix<F>, medoids: &mut [usize], assignment: &[usize]) {
    let mut members = vec![Vec::new(); medoids.len()];
    for (i, &c) in assignment.iter().enumerate() {
        members[c].push(i);
    }
    for (c, group) in members.iter().enumerate() {
        let within = |candidate: usize| -> F { group.iter().map(|&j| matrix.get(candidate, j)).sum() };
        let mut best = medoids[c];
        let mut best_sum = within(best);
        // members are in index order, so the first strict improvement or an
        // equal sum at a lower index wins
        for &candidate in group {
            let s = within(candidate);
            if s < best_sum || (s == best_sum && candidate < best) {
                best = candidate;
                best_sum = s;
            }
        }
        medoids[c] = best;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn blocks(sizes: &[usize], within: f64, across: f64) -> DistanceMatrix<f64> {
        let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
        let labels = (0..block.len()).map(|i| format!("s{i}")).collect();
        DistanceMatrix::from_fn(labels, |i, j| if block[i] == block[j] { within } else { across }).unwrap()
    }

    #[test]
    fn two_perfect_blocks() {
        let m = blocks(&[3, 4], 0.0, 1.0);
        for seed in 0..20 {
            let r = kmedoids(&m, &KMedoidsConfig::new(2, Init::PlusPlus).with_seed(seed)).unwrap();
            assert_eq!(r.objective(), 0.0);
            let (groups, noise) = r.clustering.partition();
            assert!(noise.is_empty());
            assert_eq!(groups, vec![vec!["s0", "s1", "s2"], vec!["s3", "s4", "s5", "s6"]]);
        }
    }

    #[test]
    fn k_equals_n() {
        let m = blocks(&[2, 2], 0.3, 0.8);
        let r = kmedoids(&m, &KMedoidsConfig::new(4, Init::Random)).unwrap();
        assert_eq!(r.objective(), 0.0);
        assert_eq!(r.clustering.cluster_count(), 4);
        for c in 0..4 {
            assert_eq!(r.clustering.members(c).len(), 1);
        }
    }

    #[test]
    fn duplicate_samples_keep_clusters_non_empty() {
        // every distance zero: medoids must still own themselves
        let m = blocks(&[5], 0.0, 0.0);
        let r = kmedoids(&m, &KMedoidsConfig::new(3, Init::Random).with_seed(4)).unwrap();
        for c in 0..3 {
            assert!(!r.clustering.members(c).is_empty());
        }
    }

    #[test]
    fn trained_count_checked() {
        let m = blocks(&[2, 2], 0.0, 1.0);
        let cfg = KMedoidsConfig::new(2, Init::Trained(vec!["s0".into()]));
        assert!(matches!(kmedoids(&m, &cfg), Err(ClusterError::Config(_))));
        let cfg = KMedoidsConfig::new(2, Init::Trained(vec!["s0".into(), "s2".into()]));
        let r = kmedoids(&m, &cfg).unwrap();
        assert_eq!(objective(&m, &r.clustering), Some(0.0));
        assert!(kmedoids(&m, &KMedoidsConfig::new(5, Init::Random)).is_err());
    }

    #[test]
    fn assignment_ties_go_to_lowest_cluster() {
        // s2 is equidistant from both medoids
        let labels = vec!["s0".to_string(), "s1".to_string(), "s2".to_string()];
        let m = DistanceMatrix::new(labels, vec![0.0, 1.0, 0.5, 1.0, 0.0, 0.5, 0.5, 0.5, 0.0]).unwrap();
        let cfg = KMedoidsConfig {
            max_iterations: 1,
            ..KMedoidsConfig::new(2, Init::Trained(vec!["s1".into(), "s0".into()]))
        };
        let r = kmedoids(&m, &cfg).unwrap();
        assert_eq!(r.clustering.cluster_of(2), Some(0));
    }

    proptest! {
        #[test]
        fn trace_never_increases(seed in any::<u64>(), n in 2usize..25, k in 1usize..6, plus in any::<bool>()) {
            use rand::Rng;
            let k = k.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels = (0..n).map(|i| format!("s{i}")).collect();
            let m = DistanceMatrix::<f64>::from_fn(labels, |_, _| (rng.gen_range(0..=20) as f64) / 20.0).unwrap();
            let init = if plus { Init::PlusPlus } else { Init::Random };
            let r = kmedoids(&m, &KMedoidsConfig::new(k, init).with_seed(seed)).unwrap();
            prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(r.iterations <= 100);
            prop_assert_eq!(objective(&m, &r.clustering), Some(r.objective()));
            for c in 0..k {
                prop_assert!(!r.clustering.members(c).is_empty());
            }
        }
    }
}
