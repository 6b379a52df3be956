use std::collections::VecDeque;

use super::{ClusterError, Clustering};
use crate::scalar::Scalar;
use crate::simmatrix::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanConfig<F> {
    pub min_pts: usize,
    /// Neighbourhood radius on the dissimilarity scale, within `[0, 1]`.
    pub rad: F,
}

impl<F: Scalar> DbscanConfig<F> {
    pub fn new(min_pts: usize, rad: F) -> Self {
        DbscanConfig { min_pts, rad }
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if !(self.rad >= F::zero() && self.rad <= F::one()) {
            return Err(ClusterError::Config(format!("rad = {} must lie in [0, 1]", self.rad)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Core,
    Border,
    Noise,
}

/// Core points have more than `min_pts` samples (themselves included)
/// within `rad`; border points are within `rad` of some core point; the rest
/// is noise.
pub fn classify<F: Scalar>(matrix: &DistanceMatrix<F>, cfg: &DbscanConfig<F>) -> Vec<PointClass> {
    let n = matrix.len();
    let core: Vec<bool> = (0..n)
        .map(|i| matrix.row(i).iter().filter(|&&d| d <= cfg.rad).count() > cfg.min_pts)
        .collect();
    (0..n)
        .map(|i| {
            if core[i] {
                PointClass::Core
            } else if (0..n).any(|j| core[j] && matrix.get(i, j) <= cfg.rad) {
                PointClass::Border
            } else {
                PointClass::Noise
            }
        })
        .collect()
}

/// DBSCAN over a dissimilarity matrix.
///
/// Clusters are the connected components of core points linked when their
/// dissimilarity is at most `rad`. Each border point joins the cluster of
/// its nearest core point (lowest index on ties); noise stays unassigned.
/// Cluster ids follow the smallest sample index in each cluster.
pub fn dbscan<F: Scalar>(matrix: &DistanceMatrix<F>, cfg: &DbscanConfig<F>) -> Result<Clustering, ClusterError> {
    cfg.validate()?;
    let n = matrix.len();
    let classes = classify(matrix, cfg);
    let is_core = |i: usize| classes[i] == PointClass::Core;

    let mut component: Vec<Option<usize>> = vec![None; n];
    let mut components = 0;
    for start in 0..n {
        if !is_core(start) || component[start].is_some() {
            continue;
        }
        component[start] = Some(components);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if is_core(y) && component[y].is_none() && matrix.get(x, y) <= cfg.rad {
                    component[y] = Some(components);
                    queue.push_back(y);
                }
            }
        }
        components += 1;
    }

    let mut assignment = component.clone();
    for i in 0..n {
        if classes[i] != PointClass::Border {
            continue;
        }
        let nearest = (0..n)
            .filter(|&j| is_core(j) && matrix.get(i, j) <= cfg.rad)
            .fold(None::<usize>, |best, j| match best {
                Some(b) if matrix.get(i, b) <= matrix.get(i, j) => Some(b),
                _ => Some(j),
            })
            .expect("border points have a core neighbour");
        assignment[i] = component[nearest];
    }

    // renumber by first appearance in sample order
    let mut renumber = vec![None; components];
    let mut next = 0;
    for c in assignment.iter().flatten() {
        if renumber[*c].is_none() {
            renumber[*c] = Some(next);
            next += 1;
        }
    }
    let assignment = assignment.into_iter().map(|c| c.and_then(|c| renumber[c])).collect();
    Clustering::new(matrix.labels().to_vec(), assignment, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> DistanceMatrix<f64> {
        DistanceMatrix::from_fn((0..n).map(|i| format!("s{i}")).collect(), |i, j| f(i, j)).unwrap()
    }

    #[test]
    fn strict_core_inequality() {
        let m = matrix(4, |_, _| 1.0);
        let c = dbscan(&m, &DbscanConfig::new(1, 0.1)).unwrap();
        assert_eq!(c.noise().len(), 4);
        assert_eq!(c.cluster_count(), 0);
    }

    #[test]
    fn identical_block_is_one_cluster() {
        let m = matrix(5, |_, _| 0.0);
        let c = dbscan(&m, &DbscanConfig::new(3, 0.3)).unwrap();
        assert_eq!(c.cluster_count(), 1);
        assert!(c.noise().is_empty());
    }

    #[test]
    fn everything_core_at_full_radius() {
        let m = matrix(6, |i, j| ((i * 3 + j * 5) % 7) as f64 / 7.0);
        let c = dbscan(&m, &DbscanConfig::new(0, 1.0)).unwrap();
        assert_eq!(c.cluster_count(), 1);
        assert!(c.noise().is_empty());
    }

    #[test]
    fn border_joins_nearest_core() {
        // two tight blocks; sample 4 sits between them, slightly closer to
        // the second
        let pos: [u32; 9] = [0, 1, 2, 3, 50, 95, 96, 97, 98];
        let m = matrix(9, |i, j| pos[i].abs_diff(pos[j]) as f64 / 100.0);
        let cfg = DbscanConfig::new(3, 0.46);
        let classes = classify(&m, &cfg);
        assert_eq!(classes[4], PointClass::Border);
        let c = dbscan(&m, &cfg).unwrap();
        assert_eq!(c.cluster_count(), 2);
        assert_eq!(c.cluster_of(4), c.cluster_of(5));
        assert_eq!(c.cluster_of(0), Some(0));
    }

    #[test]
    fn border_tie_goes_to_lowest_core_index() {
        let pos: [u32; 9] = [0, 1, 2, 3, 50, 97, 98, 99, 100];
        let m = matrix(9, |i, j| pos[i].abs_diff(pos[j]) as f64 / 100.0);
        let cfg = DbscanConfig::new(3, 0.47);
        assert_eq!(classify(&m, &cfg)[4], PointClass::Border);
        let c = dbscan(&m, &cfg).unwrap();
        // cores 3 and 5 are both 0.47 away
        assert_eq!(c.cluster_count(), 2);
        assert_eq!(c.cluster_of(4), c.cluster_of(3));
    }

    #[test]
    fn rejects_radius_outside_unit_interval() {
        let m = matrix(2, |_, _| 0.5);
        assert!(dbscan(&m, &DbscanConfig::new(1, 1.5)).is_err());
        assert!(dbscan(&m, &DbscanConfig::new(1, -0.1)).is_err());
    }

    #[test]
    fn permutation_invariant_partition() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.gen_range(2..20);
            let pos: Vec<f64> = (0..n).map(|_| rng.gen_range(0..100) as f64 / 100.0).collect();
            let m = matrix(n, |i, j| (pos[i] - pos[j]).abs());
            let cfg = DbscanConfig::new(rng.gen_range(0..4), rng.gen_range(0..20) as f64 / 100.0);
            let base = dbscan(&m, &cfg).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let shuffled = dbscan(&m.select(&order), &cfg).unwrap();
            // core/noise membership is order-free; border ties are broken by
            // index, so compare only where no border tie exists
            let (groups_a, noise_a) = base.partition();
            let (groups_b, noise_b) = shuffled.partition();
            assert_eq!(noise_a, noise_b);
            assert_eq!(groups_a.len(), groups_b.len());
        }
    }
}
