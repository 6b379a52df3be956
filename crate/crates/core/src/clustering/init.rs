use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterError;
use crate::scalar::Scalar;
use crate::simmatrix::DistanceMatrix;

fn check_k<F: Scalar>(matrix: &DistanceMatrix<F>, k: usize) -> Result<(), ClusterError> {
    if k == 0 || k > matrix.len() {
        return Err(ClusterError::Config(format!(
            "k = {k} must lie in 1..={}",
            matrix.len()
        )));
    }
    Ok(())
}

fn to_labels<F: Scalar>(matrix: &DistanceMatrix<F>, indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| matrix.label(i).to_string()).collect()
}

/// `k` distinct samples chosen uniformly.
pub fn init_random<F: Scalar>(matrix: &DistanceMatrix<F>, k: usize, seed: u64) -> Result<Vec<String>, ClusterError> {
    check_k(matrix, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(to_labels(matrix, &random_indices(matrix.len(), k, &mut rng)))
}

pub(crate) fn random_indices(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    sample(rng, n, k).into_vec()
}

/// k-means++ seeding on the dissimilarity matrix: the first medoid is
/// uniform, each further one is drawn with probability proportional to
/// `D(x)^2`, the squared distance to the nearest medoid chosen so far. When
/// every remaining sample has `D(x) = 0` the draw falls back to uniform.
pub fn init_plusplus<F: Scalar>(matrix: &DistanceMatrix<F>, k: usize, seed: u64) -> Result<Vec<String>, ClusterError> {
    check_k(matrix, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(to_labels(matrix, &plusplus_indices(matrix, k, &mut rng)))
}

pub(crate) fn plusplus_indices<F: Scalar>(matrix: &DistanceMatrix<F>, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = matrix.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| matrix.get(i, chosen[0]).to_f64().unwrap_or(0.0))
        .collect();
    while chosen.len() < k {
        let weights: Vec<f64> = nearest.iter().map(|d| d * d).collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                rest[rng.gen_range(0..rest.len())]
            }
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(matrix.get(i, next).to_f64().unwrap_or(0.0));
        }
    }
    chosen
}

/// Caller-chosen medoids, validated against the matrix.
pub fn init_trained<F: Scalar>(matrix: &DistanceMatrix<F>, labels: &[String]) -> Result<Vec<String>, ClusterError> {
    trained_indices(matrix, labels)?;
    Ok(labels.to_vec())
}

pub(crate) fn trained_indices<F: Scalar>(matrix: &DistanceMatrix<F>, labels: &[String]) -> Result<Vec<usize>, ClusterError> {
    let mut seen = HashSet::new();
    labels
        .iter()
        .map(|l| {
            if !seen.insert(l) {
                return Err(ClusterError::DuplicateLabel(l.clone()));
            }
            matrix.index_of(l).ok_or_else(|| ClusterError::UnknownLabel(l.clone()))
        })
        .collect()
}
