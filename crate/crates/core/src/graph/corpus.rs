use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use super::{parse_graph_with, serialize_graph, CallGraph, GraphError, ParseOptions};

/// An ordered collection of call graphs with optional ground-truth families.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCorpus {
    graphs: Vec<CallGraph>,
    family_labels: Option<BTreeMap<String, String>>,
}

impl GraphCorpus {
    pub fn new(
        graphs: Vec<CallGraph>,
        family_labels: Option<BTreeMap<String, String>>,
    ) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        for g in &graphs {
            if !seen.insert(g.label()) {
                return Err(GraphError::DuplicateLabel(g.label().to_string()));
            }
        }
        if let Some(families) = &family_labels {
            if let Some(missing) = graphs.iter().find(|g| !families.contains_key(g.label())) {
                return Err(GraphError::FamilyMismatch(format!(
                    "sample {:?} has no family",
                    missing.label()
                )));
            }
            if let Some(extra) = families.keys().find(|l| !seen.contains(l.as_str())) {
                return Err(GraphError::FamilyMismatch(format!(
                    "family entry for unknown sample {extra:?}"
                )));
            }
        }
        Ok(GraphCorpus {
            graphs,
            family_labels,
        })
    }

    pub fn graphs(&self) -> &[CallGraph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.graphs.iter().map(|g| g.label().to_string()).collect()
    }

    pub fn family_labels(&self) -> Option<&BTreeMap<String, String>> {
        self.family_labels.as_ref()
    }

    pub fn family_of(&self, label: &str) -> Option<&str> {
        self.family_labels.as_ref()?.get(label).map(String::as_str)
    }

    /// Loads every graph file in `dir` (see [`is_graph_file`]), in filename
    /// order, plus `families.csv` when present.
    pub fn load_dir(dir: &Path, opts: &ParseOptions) -> Result<Self, GraphError> {
        let io = |source| GraphError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.sort();
        let mut graphs = Vec::new();
        for path in paths {
            if !path.is_file() || !is_graph_file(&path) {
                continue;
            }
            graphs.push(load_graph_file(&path, opts)?);
        }
        let families_path = dir.join("families.csv");
        let families = if families_path.exists() {
            Some(read_families_csv(&families_path)?)
        } else {
            None
        };
        GraphCorpus::new(graphs, families)
    }

    /// Writes one `<label>.json` per graph and `families.csv` when families
    /// are known.
    pub fn write_dir(&self, dir: &Path) -> Result<(), GraphError> {
        fs::create_dir_all(dir).map_err(|source| GraphError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for g in &self.graphs {
            let path = dir.join(format!("{}.json", g.label()));
            fs::write(&path, serialize_graph(g)).map_err(|source| GraphError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        if let Some(families) = &self.family_labels {
            // keep corpus order rather than map order
            let rows: Vec<(&str, &str)> = self
                .graphs
                .iter()
                .map(|g| (g.label(), families[g.label()].as_str()))
                .collect();
            write_families_csv(&dir.join("families.csv"), &rows)?;
        }
        Ok(())
    }
}

/// `*.json`, `*.cg` and `*.txt` files, except run manifests
/// (`*.manifest.json`).
pub fn is_graph_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    matches!(ext, "json" | "cg" | "txt") && !name.ends_with(".manifest.json")
}

pub fn load_graph_file(path: &Path, opts: &ParseOptions) -> Result<CallGraph, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut opts = opts.clone();
    if opts.default_label.is_none() {
        opts.default_label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    parse_graph_with(&text, &opts).map_err(|e| GraphError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads a `label,family` CSV.
pub fn read_families_csv(path: &Path) -> Result<BTreeMap<String, String>, GraphError> {
    let file_err = |message: String| GraphError::File {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| file_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| file_err(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["label", "family"] {
        return Err(file_err("expected header `label,family`".into()));
    }
    let mut families = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| file_err(e.to_string()))?;
        if record.len() != 2 {
            return Err(file_err(format!("expected 2 fields, found {}", record.len())));
        }
        if families
            .insert(record[0].to_string(), record[1].to_string())
            .is_some()
        {
            return Err(file_err(format!("label {:?} listed twice", &record[0])));
        }
    }
    Ok(families)
}

pub fn write_families_csv(path: &Path, rows: &[(&str, &str)]) -> Result<(), GraphError> {
    let file_err = |message: String| GraphError::File {
        path: path.display().to_string(),
        message,
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| file_err(e.to_string()))?;
    writer
        .write_record(["label", "family"])
        .map_err(|e| file_err(e.to_string()))?;
    for (label, family) in rows {
        writer
            .write_record([label, family])
            .map_err(|e| file_err(e.to_string()))?;
    }
    writer.flush().map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FunctionKind;

    fn g(label: &str) -> CallGraph {
        CallGraph::new(label, [("main", FunctionKind::Local)], [(0, 0)]).unwrap()
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            GraphCorpus::new(vec![g("a"), g("a")], None),
            Err(GraphError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn family_keys_must_match() {
        let fam: BTreeMap<_, _> = [("a".to_string(), "x".to_string())].into();
        assert!(GraphCorpus::new(vec![g("a"), g("b")], Some(fam.clone())).is_err());
        let mut extra = fam.clone();
        extra.insert("zz".into(), "y".into());
        assert!(GraphCorpus::new(vec![g("a")], Some(extra)).is_err());
        assert!(GraphCorpus::new(vec![g("a")], Some(fam)).is_ok());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let fam: BTreeMap<_, _> = [("b".to_string(), "f1".to_string()), ("a".to_string(), "f0".to_string())].into();
        let corpus = GraphCorpus::new(vec![g("a"), g("b")], Some(fam)).unwrap();
        corpus.write_dir(dir.path()).unwrap();
        std::fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let back = GraphCorpus::load_dir(dir.path(), &ParseOptions::default()).unwrap();
        assert_eq!(back, corpus);
        assert_eq!(back.family_of("b"), Some("f1"));
    }

    #[test]
    fn bad_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("broken.json"), "{").unwrap();
        let err = GraphCorpus::load_dir(dir.path(), &ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("broken.json"), "{err}");
    }
}
