//! Cluster validity metrics and evaluation against known family labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::clustering::Clustering;
use crate::scalar::Scalar;
use crate::simmatrix::DistanceMatrix;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QualityError {
    #[error("clustering labels do not match the matrix labels")]
    LabelMismatch,
    #[error("sum of error needs cluster medoids")]
    MissingMedoids,
    #[error("exponent p must be positive")]
    ZeroExponent,
    #[error("silhouette needs at least 2 clusters, found {0}")]
    TooFewClusters(usize),
    #[error("k = {k} must lie in 1..{n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("no family label for sample {0:?}")]
    MissingFamily(String),
    #[error("no clustered samples")]
    NoClusteredSamples,
}

fn check_labels<F: Scalar>(matrix: &DistanceMatrix<F>, clustering: &Clustering) -> Result<(), QualityError> {
    if matrix.labels() != clustering.labels() {
        return Err(QualityError::LabelMismatch);
    }
    Ok(())
}

/// Sum over clustered samples of `(scale * d(x, medoid))^p`. Noise is
/// excluded.
pub fn sum_of_error<F: Scalar>(
    matrix: &DistanceMatrix<F>,
    clustering: &Clustering,
    p: u32,
    scale: F,
) -> Result<F, QualityError> {
    check_labels(matrix, clustering)?;
    if p == 0 {
        return Err(QualityError::ZeroExponent);
    }
    let medoids = clustering.medoids().ok_or(QualityError::MissingMedoids)?;
    let exponent = i32::try_from(p).unwrap_or(i32::MAX);
    Ok(clustering
        .assignment()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (scale * matrix.get(i, medoids[c])).powi(exponent)))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Silhouette<F> {
    /// `None` for noise samples.
    pub per_sample: Vec<Option<F>>,
    pub per_cluster: Vec<F>,
    pub overall: F,
}

/// Silhouette coefficients. `a(x)` averages over the other members of the
/// sample's cluster, `b(x)` is the smallest mean dissimilarity to another
/// cluster, and a sample alone in its cluster scores 0.
pub fn silhouette<F: Scalar>(matrix: &DistanceMatrix<F>, clustering: &Clustering) -> Result<Silhouette<F>, QualityError> {
    check_labels(matrix, clustering)?;
    let k = clustering.cluster_count();
    if k < 2 {
        return Err(QualityError::TooFewClusters(k));
    }
    let clusters = clustering.clusters();
    let mean_to = |x: usize, members: &[usize], denominator: usize| -> F {
        let total: F = members.iter().map(|&y| matrix.get(x, y)).sum();
        total / F::from_usize(denominator).expect("cluster size fits")
    };
    let per_sample: Vec<Option<F>> = clustering
        .assignment()
        .iter()
        .enumerate()
        .map(|(x, c)| {
            let c = (*c)?;
            let own = &clusters[c];
            if own.len() == 1 {
                return Some(F::zero());
            }
            let a = mean_to(x, own, own.len() - 1);
            let b = (0..k)
                .filter(|&o| o != c)
                .map(|o| mean_to(x, &clusters[o], clusters[o].len()))
                .fold(F::infinity(), F::min);
            let denom = a.max(b);
            Some(if denom > F::zero() { (b - a) / denom } else { F::zero() })
        })
        .collect();
    let mean = |values: &mut dyn Iterator<Item = F>| -> F {
        let (sum, count) = values.fold((F::zero(), 0usize), |(s, n), v| (s + v, n + 1));
        sum / F::from_usize(count).expect("count fits")
    };
    let per_cluster = clusters
        .iter()
        .map(|members| mean(&mut members.iter().map(|&i| per_sample[i].expect("clustered"))))
        .collect();
    let overall = mean(&mut per_sample.iter().flatten().copied());
    Ok(Silhouette {
        per_sample,
        per_cluster,
        overall,
    })
}

/// Per-cluster `(diameter, tightness)`: the largest and the mean
/// dissimilarity over unordered member pairs; `(0, 0)` for a singleton.
pub fn diameter_tightness<F: Scalar>(
    matrix: &DistanceMatrix<F>,
    clustering: &Clustering,
) -> Result<Vec<(F, F)>, QualityError> {
    check_labels(matrix, clustering)?;
    Ok(clustering
        .clusters()
        .iter()
        .map(|members| {
            let mut max = F::zero();
            let mut sum = F::zero();
            let mut pairs = 0usize;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    let d = matrix.get(i, j);
                    max = max.max(d);
                    sum = sum + d;
                    pairs += 1;
                }
            }
            if pairs == 0 {
                (F::zero(), F::zero())
            } else {
                // a mean can round a hair above the maximum of equal values
                (max, (sum / F::from_usize(pairs).expect("pair count fits")).min(max))
            }
        })
        .collect())
}

/// Dissimilarity from every sample to its k-th nearest other sample, in
/// ascending order.
pub fn kdist_curve<F: Scalar>(matrix: &DistanceMatrix<F>, k: usize) -> Result<Vec<F>, QualityError> {
    let n = matrix.len();
    if k == 0 || k >= n {
        return Err(QualityError::KOutOfRange { k, n });
    }
    let mut curve: Vec<F> = (0..n)
        .map(|i| {
            let mut row: Vec<F> = (0..n).filter(|&j| j != i).map(|j| matrix.get(i, j)).collect();
            row.sort_by(|a, b| a.partial_cmp(b).expect("matrix values are finite"));
            row[k - 1]
        })
        .collect();
    curve.sort_by(|a, b| a.partial_cmp(b).expect("matrix values are finite"));
    Ok(curve)
}

/// Knee of an ascending k-dist curve: the point farthest below the chord
/// joining its first and last points, after scaling both axes to `[0, 1]`.
/// Returns the index and its value, or `None` for a flat or short curve.
pub fn kdist_knee<F: Scalar>(curve: &[F]) -> Option<(usize, F)> {
    let n = curve.len();
    if n < 3 {
        return None;
    }
    let (lo, hi) = (curve[0], curve[n - 1]);
    let span = hi - lo;
    if !(span > F::zero()) {
        return None;
    }
    let last = F::from_usize(n - 1).expect("length fits");
    let mut best: Option<(usize, F)> = None;
    for (i, &v) in curve.iter().enumerate() {
        let x = F::from_usize(i).expect("index fits") / last;
        let y = (v - lo) / span;
        let gap = x - y;
        if gap > F::zero() && best.is_none_or(|(_, g)| gap > g) {
            best = Some((i, gap));
        }
    }
    best.map(|(i, _)| (i, curve[i]))
}

/// Counts of samples per (family, cluster), with a trailing noise column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    pub families: Vec<String>,
    pub clusters: usize,
    /// `counts[f][c]` for cluster `c < clusters`; `counts[f][clusters]` is noise.
    pub counts: Vec<Vec<usize>>,
}

impl FrequencyTable {
    pub fn count(&self, family: &str, cluster: Option<usize>) -> usize {
        let Some(f) = self.families.iter().position(|x| x == family) else {
            return 0;
        };
        self.counts[f][cluster.unwrap_or(self.clusters)]
    }

    pub fn noise(&self, family: &str) -> usize {
        self.count(family, None)
    }

    pub fn family_totals(&self) -> BTreeMap<&str, usize> {
        self.families
            .iter()
            .zip(&self.counts)
            .map(|(f, row)| (f.as_str(), row.iter().sum()))
            .collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        (0..self.clusters).map(|c| self.counts.iter().map(|row| row[c]).sum()).collect()
    }

    /// `family,total,noise,c0,c1,...`, one row per family.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["family".to_string(), "total".into(), "noise".into()]
            .into_iter()
            .chain((0..self.clusters).map(|c| c.to_string()));
        w.write_record(header).expect("in-memory write");
        for (family, row) in self.families.iter().zip(&self.counts) {
            let total: usize = row.iter().sum();
            let record = [family.clone(), total.to_string(), row[self.clusters].to_string()]
                .into_iter()
                .chain(row[..self.clusters].iter().map(usize::to_string));
            w.write_record(record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

pub fn frequency_table(
    clustering: &Clustering,
    family_labels: &BTreeMap<String, String>,
) -> Result<FrequencyTable, QualityError> {
    let family_of = |i: usize| -> Result<&str, QualityError> {
        let label = &clustering.labels()[i];
        family_labels
            .get(label)
            .map(String::as_str)
            .ok_or_else(|| QualityError::MissingFamily(label.clone()))
    };
    let mut families = BTreeSet::new();
    for i in 0..clustering.len() {
        families.insert(family_of(i)?);
    }
    let families: Vec<String> = families.into_iter().map(str::to_string).collect();
    let clusters = clustering.cluster_count();
    let mut counts = vec![vec![0; clusters + 1]; families.len()];
    for (i, c) in clustering.assignment().iter().enumerate() {
        let f = families.binary_search_by(|x| x.as_str().cmp(family_of(i).expect("checked"))).expect("collected");
        counts[f][c.unwrap_or(clusters)] += 1;
    }
    Ok(FrequencyTable {
        families,
        clusters,
        counts,
    })
}

/// Fraction of clustered samples that belong to their cluster's most common
/// family.
pub fn cluster_purity<F: Scalar>(
    clustering: &Clustering,
    family_labels: &BTreeMap<String, String>,
) -> Result<F, QualityError> {
    let table = frequency_table(clustering, family_labels)?;
    let clustered: usize = table.cluster_sizes().iter().sum();
    if clustered == 0 {
        return Err(QualityError::NoClusteredSamples);
    }
    let majority: usize = (0..table.clusters)
        .map(|c| table.counts.iter().map(|row| row[c]).max().unwrap_or(0))
        .sum();
    Ok(F::ratio(majority, clustered))
}

/// Validity metrics of one clustering. Silhouette fields are `None` when
/// fewer than two clusters exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport<F> {
    pub se: BTreeMap<u32, F>,
    pub silhouette_overall: Option<F>,
    pub silhouette_per_cluster: BTreeMap<usize, F>,
    pub silhouette_per_sample: BTreeMap<String, F>,
    pub diameter: BTreeMap<usize, F>,
    pub tightness: BTreeMap<usize, F>,
    #[serde(skip)]
    clustering: Clustering,
}

impl<F: Scalar> QualityReport<F> {
    /// Computes every metric. `se_exponents` may be empty; otherwise the
    /// clustering must carry medoids.
    pub fn compute(
        matrix: &DistanceMatrix<F>,
        clustering: &Clustering,
        se_exponents: &[u32],
        se_scale: F,
    ) -> Result<Self, QualityError> {
        check_labels(matrix, clustering)?;
        let mut se = BTreeMap::new();
        for &p in se_exponents {
            se.insert(p, sum_of_error(matrix, clustering, p, se_scale)?);
        }
        let (silhouette_overall, silhouette_per_cluster, silhouette_per_sample) = match silhouette(matrix, clustering) {
            Ok(s) => (
                Some(s.overall),
                s.per_cluster.iter().copied().enumerate().collect(),
                clustering
                    .labels()
                    .iter()
                    .zip(&s.per_sample)
                    .filter_map(|(l, v)| v.map(|v| (l.clone(), v)))
                    .collect(),
            ),
            Err(QualityError::TooFewClusters(_)) => (None, BTreeMap::new(), BTreeMap::new()),
            Err(e) => return Err(e),
        };
        let spread = diameter_tightness(matrix, clustering)?;
        Ok(QualityReport {
            se,
            silhouette_overall,
            silhouette_per_cluster,
            silhouette_per_sample,
            diameter: spread.iter().map(|s| s.0).enumerate().collect(),
            tightness: spread.iter().map(|s| s.1).enumerate().collect(),
            clustering: clustering.clone(),
        })
    }

    /// `label,cluster,silhouette` for clustered samples, in sample order.
    pub fn per_sample_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "cluster", "silhouette"]).expect("in-memory write");
        for (label, c) in self.clustering.labels().iter().zip(self.clustering.assignment()) {
            if let (Some(c), Some(s)) = (c, self.silhouette_per_sample.get(label)) {
                w.write_record([label.clone(), c.to_string(), s.to_string()]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// `cluster,size,silhouette,diameter,tightness`; silhouette is empty
    /// when undefined.
    pub fn per_cluster_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cluster", "size", "silhouette", "diameter", "tightness"])
            .expect("in-memory write");
        for (c, members) in self.clustering.clusters().iter().enumerate() {
            let s = self.silhouette_per_cluster.get(&c).map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                c.to_string(),
                members.len().to_string(),
                s,
                self.diameter[&c].to_string(),
                self.tightness[&c].to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// `p,se`, one row per exponent.
    pub fn se_csv(&self) -> String {
        let mut out = String::from("p,se\n");
        for (p, v) in &self.se {
            let _ = writeln!(out, "{p},{v}");
        }
        out
    }

    pub fn summary(&self) -> String {
        let c = &self.clustering;
        let mut out = String::new();
        let _ = writeln!(out, "samples: {}", c.len());
        let _ = writeln!(out, "clusters: {}", c.cluster_count());
        let _ = writeln!(out, "noise: {}", c.noise().len());
        for (p, v) in &self.se {
            let _ = writeln!(out, "SE_{p}: {v}");
        }
        match self.silhouette_overall {
            Some(s) => {
                let _ = writeln!(out, "silhouette: {s}");
            }
            None => out.push_str("silhouette: undefined (fewer than 2 clusters)\n"),
        }
        if !self.diameter.is_empty() {
            let max_d = self.diameter.values().copied().fold(F::zero(), F::max);
            let mean_t = self.tightness.values().copied().sum::<F>()
                / F::from_usize(self.tightness.len()).expect("count fits");
            let _ = writeln!(out, "largest diameter: {max_d}");
            let _ = writeln!(out, "mean tightness: {mean_t}");
        }
        out
    }
}

/// Two-column `rank,distance` CSV of a k-dist curve.
pub fn kdist_csv<F: Scalar>(curve: &[F]) -> String {
    let mut out = String::from("rank,distance\n");
    for (i, v) in curve.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn blocks(sizes: &[usize], within: f64, across: f64) -> (DistanceMatrix<f64>, Clustering) {
        let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
        let m = DistanceMatrix::from_fn(labels(block.len()), |i, j| if block[i] == block[j] { within } else { across })
            .unwrap();
        let medoids = (0..sizes.len()).map(|b| block.iter().position(|&x| x == b).unwrap()).collect();
        let c = Clustering::new(labels(block.len()), block.iter().map(|&b| Some(b)).collect(), Some(medoids)).unwrap();
        (m, c)
    }

    fn families(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(l, f)| (l.to_string(), f.to_string())).collect()
    }

    #[test]
    fn se_on_blocks_and_single_pair() {
        let (m, c) = blocks(&[3, 2], 0.0, 1.0);
        for p in 1..4 {
            assert_eq!(sum_of_error(&m, &c, p, 100.0).unwrap(), 0.0);
        }
        let m = DistanceMatrix::<f64>::new(labels(2), vec![0.0, 0.2, 0.2, 0.0]).unwrap();
        let c = Clustering::new(labels(2), vec![Some(0), Some(0)], Some(vec![0])).unwrap();
        assert!((sum_of_error(&m, &c, 1, 100.0).unwrap() - 20.0).abs() < 1e-9);
        assert!((sum_of_error(&m, &c, 2, 100.0).unwrap() - 400.0).abs() < 1e-9);
        let no_medoids = Clustering::new(labels(2), vec![Some(0), Some(0)], None).unwrap();
        assert_eq!(sum_of_error(&m, &no_medoids, 1, 100.0), Err(QualityError::MissingMedoids));
        assert_eq!(sum_of_error(&m, &c, 0, 100.0), Err(QualityError::ZeroExponent));
    }

    #[test]
    fn silhouette_perfect_blocks() {
        let (m, c) = blocks(&[3, 4], 0.0, 1.0);
        let s = silhouette(&m, &c).unwrap();
        assert!(s.per_sample.iter().all(|v| *v == Some(1.0)));
        assert_eq!(s.overall, 1.0);
    }

    #[test]
    fn silhouette_hand_built() {
        let (m, c) = blocks(&[2, 2], 0.2, 0.4);
        let s = silhouette(&m, &c).unwrap();
        for v in s.per_sample.iter().flatten() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn silhouette_singleton_and_noise() {
        let m = DistanceMatrix::from_fn(labels(4), |i, j| 0.1 * (i + j) as f64 / 6.0 + 0.3).unwrap();
        let c = Clustering::new(labels(4), vec![Some(0), Some(0), Some(1), None], None).unwrap();
        let s = silhouette(&m, &c).unwrap();
        assert_eq!(s.per_sample[2], Some(0.0));
        assert_eq!(s.per_sample[3], None);
        assert_eq!(s.per_cluster[1], 0.0);
        let one = Clustering::new(labels(4), vec![Some(0); 4], None).unwrap();
        assert_eq!(silhouette(&m, &one), Err(QualityError::TooFewClusters(1)));
    }

    #[test]
    fn diameter_and_tightness() {
        let m = DistanceMatrix::<f64>::new(labels(4), vec![
            0.0, 0.1, 0.2, 0.9, //
            0.1, 0.0, 0.3, 0.9, //
            0.2, 0.3, 0.0, 0.9, //
            0.9, 0.9, 0.9, 0.0,
        ])
        .unwrap();
        let c = Clustering::new(labels(4), vec![Some(0), Some(0), Some(0), Some(1)], None).unwrap();
        let dt = diameter_tightness(&m, &c).unwrap();
        assert_eq!(dt[0].0, 0.3);
        assert!((dt[0].1 - 0.2).abs() < 1e-12);
        assert_eq!(dt[1], (0.0, 0.0));
        let (m, c) = blocks(&[4], 0.0, 1.0);
        assert_eq!(diameter_tightness(&m, &c).unwrap(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn kdist_examples() {
        let m = DistanceMatrix::from_fn(labels(3), |_, _| 0.0).unwrap();
        assert_eq!(kdist_curve(&m, 1).unwrap(), vec![0.0; 3]);
        let (m, _) = blocks(&[2, 2], 0.1, 0.9);
        assert_eq!(kdist_curve(&m, 1).unwrap(), vec![0.1; 4]);
        assert_eq!(kdist_curve(&m, 2).unwrap(), vec![0.9; 4]);
        assert_eq!(kdist_curve(&m, 0), Err(QualityError::KOutOfRange { k: 0, n: 4 }));
        assert_eq!(kdist_curve(&m, 4), Err(QualityError::KOutOfRange { k: 4, n: 4 }));
    }

    #[test]
    fn knee_of_hockey_stick() {
        let mut curve = vec![0.05; 20];
        curve.extend([0.1, 0.5, 0.8, 0.9]);
        let (i, v) = kdist_knee(&curve).unwrap();
        assert_eq!((i, v), (19, 0.05));
        assert_eq!(kdist_knee(&[0.2; 5]), None);
    }

    #[test]
    fn frequency_table_split_family() {
        // 17 samples of one family over three clusters, plus one other sample
        let mut assignment = vec![Some(0); 14];
        assignment.push(Some(1));
        assignment.extend([Some(2), Some(2)]);
        assignment.push(None);
        let c = Clustering::new(labels(18), assignment, None).unwrap();
        let mut fam: BTreeMap<String, String> = (0..17).map(|i| (format!("s{i}"), "boaxxe".into())).collect();
        fam.insert("s17".into(), "other".into());
        let t = frequency_table(&c, &fam).unwrap();
        assert_eq!(t.counts[0], vec![14, 1, 2, 0]);
        assert_eq!(t.noise("other"), 1);
        assert_eq!(t.family_totals()["boaxxe"], 17);
        assert_eq!(t.cluster_sizes(), vec![14, 1, 2]);
        assert_eq!(
            t.to_csv(),
            "family,total,noise,0,1,2\nboaxxe,17,0,14,1,2\nother,1,1,0,0,0\n"
        );
    }

    #[test]
    fn frequency_table_all_noise_and_missing() {
        let c = Clustering::new(labels(3), vec![None; 3], None).unwrap();
        let fam = families(&[("s0", "a"), ("s1", "a"), ("s2", "b")]);
        let t = frequency_table(&c, &fam).unwrap();
        assert_eq!(t.counts, vec![vec![2], vec![1]]);
        assert_eq!(cluster_purity::<f64>(&c, &fam), Err(QualityError::NoClusteredSamples));
        let partial = families(&[("s0", "a")]);
        assert_eq!(frequency_table(&c, &partial), Err(QualityError::MissingFamily("s1".into())));
    }

    #[test]
    fn purity_examples() {
        let mut fam = BTreeMap::new();
        for i in 0..14 {
            fam.insert(format!("s{i}"), if i < 12 { "ceeinject" } else if i == 12 { "runonce" } else { "neeris" }.to_string());
        }
        let one = Clustering::new(labels(14), vec![Some(0); 14], None).unwrap();
        let p: f64 = cluster_purity(&one, &fam).unwrap();
        assert!((p - 12.0 / 14.0).abs() < 1e-12);
        assert!((p - 0.86).abs() < 0.01);
        let singletons = Clustering::new(labels(14), (0..14).map(Some).collect(), None).unwrap();
        assert_eq!(cluster_purity::<f64>(&singletons, &fam).unwrap(), 1.0);
    }

    #[test]
    fn report_emitters() {
        let (m, c) = blocks(&[2, 1], 0.0, 1.0);
        let r = QualityReport::compute(&m, &c, &[1, 2], 100.0).unwrap();
        assert_eq!(r.se_csv(), "p,se\n1,0\n2,0\n");
        assert_eq!(r.per_sample_csv(), "label,cluster,silhouette\ns0,0,1\ns1,0,1\ns2,1,0\n");
        assert_eq!(r.per_cluster_csv(), "cluster,size,silhouette,diameter,tightness\n0,2,1,0,0\n1,1,0,0,0\n");
        assert!(r.summary().contains("silhouette: 0.6666666666666666"));
        let single = Clustering::new(labels(3), vec![Some(0); 3], None).unwrap();
        let r = QualityReport::compute(&m, &single, &[], 100.0).unwrap();
        assert_eq!(r.silhouette_overall, None);
        assert!(QualityReport::compute(&m, &single, &[1], 100.0).is_err());
        assert_eq!(kdist_csv(&[0.0, 0.5]), "rank,distance\n0,0\n1,0.5\n");
    }

    #[test]
    fn mismatched_labels_rejected() {
        let (m, _) = blocks(&[2], 0.0, 1.0);
        let c = Clustering::new(vec!["x".into(), "y".into()], vec![Some(0), Some(0)], Some(vec![0])).unwrap();
        assert_eq!(sum_of_error(&m, &c, 1, 1.0), Err(QualityError::LabelMismatch));
    }

    proptest! {
        #[test]
        fn metric_invariants(seed in any::<u64>(), n in 2usize..16, k in 1usize..5, noise in 0.0f64..0.4) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = DistanceMatrix::from_fn(labels(n), |_, _| rng.gen_range(0..=100) as f64 / 100.0).unwrap();
            let k = k.min(n);
            let mut assignment: Vec<Option<usize>> = (0..n).map(|i| Some(i % k)).collect();
            for a in assignment.iter_mut().skip(k) {
                if rng.gen_bool(noise) { *a = None; }
            }
            let c = Clustering::new(labels(n), assignment, None).unwrap();
            if let Ok(s) = silhouette(&m, &c) {
                for v in s.per_sample.iter().flatten().chain(&s.per_cluster) {
                    prop_assert!((-1.0..=1.0).contains(v));
                }
            }
            for (d, t) in diameter_tightness(&m, &c).unwrap() {
                prop_assert!(d >= t && t >= 0.0);
            }
            let curve = kdist_curve(&m, 1).unwrap();
            prop_assert!(curve.windows(2).all(|w| w[0] <= w[1]));
            let fam: BTreeMap<String, String> = (0..n).map(|i| (format!("s{i}"), format!("f{}", i % 3))).collect();
            let t = frequency_table(&c, &fam).unwrap();
            let sizes: Vec<usize> = c.clusters().iter().map(Vec::len).collect();
            prop_assert_eq!(t.cluster_sizes(), sizes);
            prop_assert_eq!(t.family_totals().values().sum::<usize>(), n);
        }
    }
}
