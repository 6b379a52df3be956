//! Partitional (k-medoids) and density-based (DBSCAN) clustering over a
//! precomputed [`DistanceMatrix`](crate::simmatrix::DistanceMatrix).

mod dbscan;
mod init;
mod kmedoids;

use std::collections::{BTreeMap, HashMap};

pub use dbscan::{classify, dbscan, DbscanConfig, PointClass};
pub use init::{init_plusplus, init_random, init_trained};
pub use kmedoids::{kmedoids, objective, Init, KMedoidsConfig, KMedoidsResult};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown sample label {0:?}")]
    UnknownLabel(String),
    #[error("sample label {0:?} listed more than once")]
    DuplicateLabel(String),
    #[error("invalid clustering: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("clustering labels do not match the matrix labels")]
    LabelMismatch,
}

/// Assignment of samples to clusters `0..k`, with optional medoids and a
/// noise set (unassigned samples).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<String>,
    assignment: Vec<Option<usize>>,
    medoids: Option<Vec<usize>>,
    clusters: usize,
}

impl Clustering {
    /// `assignment[i]` is the cluster of sample `i` (`None` for noise);
    /// `medoids[c]` is the sample index representing cluster `c`.
    pub fn new(
        labels: Vec<String>,
        assignment: Vec<Option<usize>>,
        medoids: Option<Vec<usize>>,
    ) -> Result<Self, ClusterError> {
        if labels.len() != assignment.len() {
            return Err(ClusterError::Invalid(format!(
                "{} labels but {} assignments",
                labels.len(),
                assignment.len()
            )));
        }
        let mut seen = HashMap::new();
        for l in &labels {
            if seen.insert(l.as_str(), ()).is_some() {
                return Err(ClusterError::DuplicateLabel(l.clone()));
            }
        }
        let clusters = assignment.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; clusters];
        for &c in assignment.iter().flatten() {
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(ClusterError::Invalid(format!("cluster {empty} is empty")));
        }
        if let Some(medoids) = &medoids {
            if medoids.len() != clusters {
                return Err(ClusterError::Invalid(format!(
                    "{} medoids for {clusters} clusters",
                    medoids.len()
                )));
            }
            for (c, &m) in medoids.iter().enumerate() {
                if assignment.get(m).copied().flatten() != Some(c) {
                    return Err(ClusterError::Invalid(format!("medoid of cluster {c} is not a member")));
                }
            }
        }
        Ok(Clustering {
            labels,
            assignment,
            medoids,
            clusters,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    pub fn cluster_of(&self, sample: usize) -> Option<usize> {
        self.assignment[sample]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == Some(cluster)).collect()
    }

    /// Members of every cluster, indexed by cluster id.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.clusters];
        for (i, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn noise(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i].is_none()).collect()
    }

    pub fn medoids(&self) -> Option<&[usize]> {
        self.medoids.as_deref()
    }

    pub fn assignments_by_label(&self) -> BTreeMap<&str, Option<usize>> {
        self.labels.iter().map(String::as_str).zip(self.assignment.iter().copied()).collect()
    }

    /// Partition as a set of label sets, for comparisons that ignore
    /// cluster numbering.
    pub fn partition(&self) -> (Vec<Vec<String>>, Vec<String>) {
        let mut groups: Vec<Vec<String>> = self
            .clusters()
            .into_iter()
            .map(|members| {
                let mut g: Vec<String> = members.into_iter().map(|i| self.labels[i].clone()).collect();
                g.sort();
                g
            })
            .collect();
        groups.sort();
        let mut noise: Vec<String> = self.noise().into_iter().map(|i| self.labels[i].clone()).collect();
        noise.sort();
        (groups, noise)
    }

    /// Reorders samples to follow `labels`.
    pub fn aligned_to(&self, labels: &[String]) -> Result<Clustering, ClusterError> {
        if labels.len() != self.len() {
            return Err(ClusterError::LabelMismatch);
        }
        let index: HashMap<&str, usize> = self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut old_of_new = Vec::with_capacity(labels.len());
        for l in labels {
            old_of_new.push(*index.get(l.as_str()).ok_or(ClusterError::LabelMismatch)?);
        }
        let mut new_of_old = vec![0; labels.len()];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old] = new;
        }
        Clustering::new(
            labels.to_vec(),
            old_of_new.iter().map(|&old| self.assignment[old]).collect(),
            self.medoids.as_ref().map(|m| m.iter().map(|&old| new_of_old[old]).collect()),
        )
    }

    /// `label,cluster` rows, `-1` marking noise.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,cluster\n");
        for (label, c) in self.labels.iter().zip(&self.assignment) {
            let c = c.map_or(-1, |c| c as i64);
            out.push_str(&csv_field(label));
            out.push_str(&format!(",{c}\n"));
        }
        out
    }

    /// `cluster,medoid_label` rows, when medoids exist.
    pub fn medoids_csv(&self) -> Option<String> {
        let medoids = self.medoids.as_ref()?;
        let mut out = String::from("cluster,medoid_label\n");
        for (c, &m) in medoids.iter().enumerate() {
            out.push_str(&format!("{c},{}\n", csv_field(&self.labels[m])));
        }
        Some(out)
    }

    pub fn from_csv(assignments: &str, medoids: Option<&str>) -> Result<Self, ClusterError> {
        let rows = read_pairs(assignments, ["label", "cluster"])?;
        let mut labels = Vec::with_capacity(rows.len());
        let mut assignment = Vec::with_capacity(rows.len());
        for (line, label, cluster) in rows {
            let c: i64 = cluster.parse().map_err(|_| ClusterError::Parse {
                line,
                message: format!("cluster {cluster:?} is not an integer"),
            })?;
            assignment.push(match c {
                -1 => None,
                c if c >= 0 => Some(c as usize),
                _ => {
                    return Err(ClusterError::Parse {
                        line,
                        message: format!("invalid cluster id {c}"),
                    })
                }
            });
            labels.push(label);
        }
        let medoids = match medoids {
            None => None,
            Some(text) => {
                let rows = read_pairs(text, ["cluster", "medoid_label"])?;
                let mut medoids = vec![usize::MAX; rows.len()];
                for (line, cluster, label) in rows {
                    let c: usize = cluster.parse().map_err(|_| ClusterError::Parse {
                        line,
                        message: format!("cluster {cluster:?} is not a non-negative integer"),
                    })?;
                    let idx = labels
                        .iter()
                        .position(|l| *l == label)
                        .ok_or_else(|| ClusterError::UnknownLabel(label.clone()))?;
                    if c >= medoids.len() || medoids[c] != usize::MAX {
                        return Err(ClusterError::Parse {
                            line,
                            message: format!("unexpected cluster id {c}"),
                        });
                    }
                    medoids[c] = idx;
                }
                Some(medoids)
            }
        };
        Clustering::new(labels, assignment, medoids)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_pairs(text: &str, header: [&str; 2]) -> Result<Vec<(usize, String, String)>, ClusterError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| ClusterError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(ClusterError::Parse {
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| ClusterError::Parse {
            line,
            message: e.to_string(),
        })?;
        rows.push((line, record[0].to_string(), record[1].to_string()));
    }
    Ok(rows)
}
