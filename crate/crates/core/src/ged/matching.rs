use std::fmt::Write as _;

use super::GedError;
use crate::graph::CallGraph;

/// Bijection between the dummy-augmented vertex sets of two graphs.
///
/// Only pairs with at least one real vertex are stored; `None` is the dummy.
/// Every vertex of the left graph appears exactly once on the left, every
/// vertex of the right graph exactly once on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    left_label: String,
    right_label: String,
    left_order: usize,
    right_order: usize,
    pairs: Vec<(Option<usize>, Option<usize>)>,
}

impl Matching {
    pub fn new(
        left: &CallGraph,
        right: &CallGraph,
        pairs: Vec<(Option<usize>, Option<usize>)>,
    ) -> Result<Self, GedError> {
        Self::from_parts(
            left.label().to_string(),
            right.label().to_string(),
            left.order(),
            right.order(),
            pairs,
        )
    }

    pub fn from_parts(
        left_label: String,
        right_label: String,
        left_order: usize,
        right_order: usize,
        pairs: Vec<(Option<usize>, Option<usize>)>,
    ) -> Result<Self, GedError> {
        let invalid = |msg: String| Err(GedError::InvalidMatching(msg));
        let mut left_seen = vec![false; left_order];
        let mut right_seen = vec![false; right_order];
        for &(l, r) in &pairs {
            if l.is_none() && r.is_none() {
                return invalid("dummy matched to dummy".into());
            }
            if let Some(l) = l {
                if l >= left_order {
                    return invalid(format!("left vertex {l} out of range (order {left_order})"));
                }
                if std::mem::replace(&mut left_seen[l], true) {
                    return invalid(format!("left vertex {l} matched twice"));
                }
            }
            if let Some(r) = r {
                if r >= right_order {
                    return invalid(format!("right vertex {r} out of range (order {right_order})"));
                }
                if std::mem::replace(&mut right_seen[r], true) {
                    return invalid(format!("right vertex {r} matched twice"));
                }
            }
        }
        if let Some(l) = left_seen.iter().position(|s| !s) {
            return invalid(format!("left vertex {l} unmatched"));
        }
        if let Some(r) = right_seen.iter().position(|s| !s) {
            return invalid(format!("right vertex {r} unmatched"));
        }
        Ok(Matching {
            left_label,
            right_label,
            left_order,
            right_order,
            pairs,
        })
    }

    /// Every vertex matched to itself.
    pub fn identity(g: &CallGraph) -> Self {
        Matching {
            left_label: g.label().to_string(),
            right_label: g.label().to_string(),
            left_order: g.order(),
            right_order: g.order(),
            pairs: (0..g.order()).map(|i| (Some(i), Some(i))).collect(),
        }
    }

    pub fn pairs(&self) -> &[(Option<usize>, Option<usize>)] {
        &self.pairs
    }

    pub fn left_label(&self) -> &str {
        &self.left_label
    }

    pub fn right_label(&self) -> &str {
        &self.right_label
    }

    pub fn left_order(&self) -> usize {
        self.left_order
    }

    pub fn right_order(&self) -> usize {
        self.right_order
    }

    /// Image of every left vertex (`None` = deleted).
    pub fn forward(&self) -> Vec<Option<usize>> {
        let mut image = vec![None; self.left_order];
        for &(l, r) in &self.pairs {
            if let Some(l) = l {
                image[l] = r;
            }
        }
        image
    }

    /// The same bijection read from right to left.
    pub fn inverse(&self) -> Matching {
        Matching {
            left_label: self.right_label.clone(),
            right_label: self.left_label.clone(),
            left_order: self.right_order,
            right_order: self.left_order,
            pairs: self.pairs.iter().map(|&(l, r)| (r, l)).collect(),
        }
    }

    /// Two-column debug format: `left right` per line, `-` for a dummy.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {}", self.left_label, self.right_label);
        let id = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        for &(l, r) in &self.pairs {
            let _ = writeln!(out, "{} {}", id(l), id(r));
        }
        out
    }
}

/// Parses the two-column format back against the graphs it refers to.
pub fn parse_matching(text: &str, left: &CallGraph, right: &CallGraph) -> Result<Matching, GedError> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || GedError::InvalidMatching(format!("line {}: expected `left right`", idx + 1));
        let mut fields = line.split_whitespace();
        let mut side = || -> Result<Option<usize>, GedError> {
            match fields.next().ok_or_else(bad)? {
                "-" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad()),
            }
        };
        let pair = (side()?, side()?);
        if fields.next().is_some() {
            return Err(bad());
        }
        pairs.push(pair);
    }
    Matching::new(left, right, pairs)
}
