//! Explicitly listed parent sets.

use std::collections::HashMap;

use super::{prefer, DISALLOWED};
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

#[derive(Debug, Clone)]
pub(super) struct ListedTable {
    /// Sorted best first, ties towards smaller sets.
    entries: Vec<(NodeSet, f64)>,
    lookup: HashMap<NodeSet, f64>,
    candidates: NodeSet,
}

impl ListedTable {
    pub(super) fn new(node: usize, p: usize, mut entries: Vec<(NodeSet, f64)>) -> Result<Self> {
        let all = NodeSet::full(p);
        let mut lookup = HashMap::with_capacity(entries.len());
        let mut candidates = NodeSet::EMPTY;
        for &(s, x) in &entries {
            if s.contains(node) || !s.is_subset(all) {
                return Err(Error::Invalid(format!(
                    "parent set {s:?} is not valid for node {node}"
                )));
            }
            if x.is_nan() {
                return Err(Error::Invalid(format!("NaN score for node {node}")));
            }
            if lookup.insert(s, x).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate parent set {s:?} for node {node}"
                )));
            }
            candidates = candidates.union(s);
        }
        entries.sort_by(|a, b| {
            if prefer(a.1, a.0, b.1, b.0) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        Ok(ListedTable {
            entries,
            lookup,
            candidates,
        })
    }

    pub(super) fn local_score(&self, parents: NodeSet) -> f64 {
        self.lookup.get(&parents).copied().unwrap_or(DISALLOWED)
    }

    pub(super) fn best(&self, potential: NodeSet) -> (f64, NodeSet) {
        self.entries
            .iter()
            .find(|(s, _)| s.is_subset(potential))
            .map(|&(s, x)| (x, s))
            .unwrap_or((DISALLOWED, NodeSet::EMPTY))
    }

    pub(super) fn for_each(&self, f: &mut impl FnMut(NodeSet, f64)) {
        for &(s, x) in &self.entries {
            if x.is_finite() {
                f(s, x);
            }
        }
    }

    pub(super) fn candidate_parents(&self) -> NodeSet {
        self.candidates
    }
}
