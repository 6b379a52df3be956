//! Pairwise dissimilarity matrices over a corpus.
//!
//! Entry `(i, j)` is the symmetrized similarity score of graphs `i` and `j`.
//! Each pair is solved with its own seed derived from the run seed and the
//! two sample labels, so the matrix does not depend on the number of workers,
//! the scheduling order, or the position of samples in the corpus.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::ged::{exact_min_ged, pair_similarity, AnnealConfig, GedError};
use crate::graph::GraphCorpus;
use crate::scalar::Scalar;

/// Largest tolerated `|v[i][j] - v[j][i]|` when loading a matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is not square: {rows} rows for {labels} labels")]
    NotSquare { rows: usize, labels: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("matrix is asymmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("nonzero diagonal entry at row {0}")]
    Diagonal(usize),
    #[error("value {value} at ({i}, {j}) is outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: String },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("row {row} is labelled {found:?} but column {row} is {expected:?}")]
    LabelOrder { row: usize, found: String, expected: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("worker count must be positive")]
    Workers,
    #[error(transparent)]
    Ged(#[from] GedError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Dense symmetric matrix of dissimilarities in `[0, 1]` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<F> {
    labels: Vec<String>,
    values: Vec<F>,
}

impl<F: Scalar> DistanceMatrix<F> {
    /// Validates and wraps row-major `values`.
    pub fn new(labels: Vec<String>, values: Vec<F>) -> Result<Self, MatrixError> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(MatrixError::NotSquare {
                rows: values.len().checked_div(n).unwrap_or(values.len()),
                labels: n,
            });
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(MatrixError::DuplicateLabel(l.clone()));
            }
        }
        let tolerance = F::from_f64_lossy(SYMMETRY_TOLERANCE);
        for i in 0..n {
            if values[i * n + i] != F::zero() {
                return Err(MatrixError::Diagonal(i));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= F::zero() && v <= F::one()) {
                    return Err(MatrixError::OutOfRange {
                        i,
                        j,
                        value: v.to_string(),
                    });
                }
                if (v - values[j * n + i]).abs() > tolerance {
                    return Err(MatrixError::Asymmetric { i, j });
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    /// Builds a matrix from a symmetric function of index pairs, evaluated
    /// on the upper triangle only.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> F) -> Result<Self, MatrixError> {
        let n = labels.len();
        let mut values = vec![F::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(labels, values)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Submatrix over the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        DistanceMatrix { labels, values }
    }

    /// CSV text: `label,<l1>,...,<ln>` then one `<li>,v...` row per sample.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let header = std::iter::once("label").chain(self.labels.iter().map(String::as_str));
        writer.write_record(header).expect("in-memory write");
        for (i, label) in self.labels.iter().enumerate() {
            let row = std::iter::once(label.clone()).chain(self.row(i).iter().map(|v| v.to_string()));
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, MatrixError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let parse_err = |line: usize, message: String| MatrixError::Parse { line, message };
        let mut records = reader.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
            None => return Err(parse_err(1, "empty file".into())),
        };
        if header.get(0) != Some("label") {
            return Err(parse_err(1, "header must start with `label`".into()));
        }
        let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let n = labels.len();
        let mut values = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (row, record) in records.enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| parse_err(line, e.to_string()))?;
            if record.len() != n + 1 {
                return Err(MatrixError::RowLength {
                    row,
                    found: record.len().saturating_sub(1),
                    expected: n,
                });
            }
            if row < n && record[0] != labels[row] {
                return Err(MatrixError::LabelOrder {
                    row,
                    found: record[0].to_string(),
                    expected: labels[row].clone(),
                });
            }
            for field in record.iter().skip(1) {
                let v: F = field
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line, format!("cannot parse {field:?} as a number")))?;
                values.push(v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(MatrixError::NotSquare { rows, labels: n });
        }
        Self::new(labels, values)
    }
}

pub fn save_matrix<F: Scalar>(m: &DistanceMatrix<F>, path: &Path) -> Result<(), MatrixError> {
    std::fs::write(path, m.to_csv()).map_err(|e| MatrixError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_matrix<F: Scalar>(path: &Path) -> Result<DistanceMatrix<F>, MatrixError> {
    let text = std::fs::read_to_string(path).map_err(|e| MatrixError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    DistanceMatrix::from_csv(&text)
}

/// Seed for one pair, independent of argument order.
pub fn pair_seed(seed: u64, a: &str, b: &str) -> u64 {
    let (first, second) = if a <= b { (a, b) } else { (b, a) };
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for label in [first, second] {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatcherMode {
    /// `pair_similarity`: annealing, exact below `exact_max_order`.
    Approximate,
    /// Exhaustive search for every pair, failing beyond the size limit.
    Exact { max_order: usize },
}

pub fn compute_matrix<F: Scalar>(
    corpus: &GraphCorpus,
    cfg: &AnnealConfig,
    workers: usize,
) -> Result<DistanceMatrix<F>, MatrixError> {
    compute_matrix_with(corpus, cfg, workers, MatcherMode::Approximate)
}

/// Fills the upper triangle on a pool of `workers` threads and mirrors it.
pub fn compute_matrix_with<F: Scalar>(
    corpus: &GraphCorpus,
    cfg: &AnnealConfig,
    workers: usize,
    mode: MatcherMode,
) -> Result<DistanceMatrix<F>, MatrixError> {
    if workers == 0 {
        return Err(MatrixError::Workers);
    }
    cfg.validate()?;
    let graphs = corpus.graphs();
    let n = graphs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| MatrixError::Io {
            path: "thread pool".into(),
            message: e.to_string(),
        })?;
    let scores: Vec<Result<F, GedError>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (g, h) = (&graphs[i], &graphs[j]);
                let cfg = cfg.clone().with_seed(pair_seed(cfg.seed, g.label(), h.label()));
                match mode {
                    MatcherMode::Approximate => Ok(pair_similarity(g, h, &cfg)),
                    MatcherMode::Exact { max_order } => exact_min_ged(g, h, max_order).map(|s| s.sigma),
                }
            })
            .collect()
    });
    let mut values = vec![F::zero(); n * n];
    for (&(i, j), score) in pairs.iter().zip(scores) {
        let v = score?;
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    DistanceMatrix::new(corpus.labels(), values)
}
