//! Local score tables and maximal node score queries.
//!
//! A [`ScoreProvider`] stores `σ(i, Pa)` for every admissible parent set of
//! every node and answers `ŝ(i | P) = max_{Pa ⊆ P} σ(i, Pa)`. Two storage
//! layouts exist:
//!
//! * dense tables over a search space where each node has a preselected
//!   candidate set plus optionally one parent from outside it, with
//!   cumulative-max tables for constant-time best-subset lookup;
//! * listed parent sets, as read from a local-score file, sorted best first.
//!
//! Parent sets that are not admissible score `-inf`.

mod bge;
mod data;
mod dense;
mod io;
mod listed;
mod space;

use std::cmp::Ordering;

pub use bge::{compute_bge_listed, compute_bge_tables, BgeParams, BgeScorer};
pub use data::DataMatrix;
pub use io::{format_score_text, load_score_file, parse_score_text, write_score_file};
pub use space::{NodeSpace, SearchSpace};

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};
use dense::DenseTable;
use listed::ListedTable;

/// Score of a disallowed parent set.
pub const DISALLOWED: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone)]
enum NodeTable {
    Dense(DenseTable),
    Listed(ListedTable),
}

/// Immutable per-node local score tables.
#[derive(Debug, Clone)]
pub struct ScoreProvider {
    names: Vec<String>,
    tables: Vec<NodeTable>,
    warnings: Vec<String>,
}

/// `true` if `(a_score, a_set)` is preferred over `(b_score, b_set)`: higher
/// score, then fewer parents, then the lexicographically smaller set.
pub(crate) fn prefer(a_score: f64, a_set: NodeSet, b_score: f64, b_set: NodeSet) -> bool {
    match a_score.partial_cmp(&b_score) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => a_set.tie_cmp(b_set) == Ordering::Less,
    }
}

impl ScoreProvider {
    /// Dense tables over `space`, filled by `score(node, parent_set)`.
    pub fn from_space<F>(names: Vec<String>, space: &SearchSpace, mut score: F) -> Result<Self>
    where
        F: FnMut(usize, NodeSet) -> Result<f64>,
    {
        let p = names.len();
        check_names(&names)?;
        space.validate(p)?;
        let tables = (0..p)
            .map(|i| {
                let ns = &space.nodes()[i];
                DenseTable::build(i, p, ns.preselected, ns.plus1, |set| score(i, set))
                    .map(NodeTable::Dense)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreProvider {
            names,
            tables,
            warnings: Vec::new(),
        })
    }

    /// Listed parent sets per node. Duplicate sets are rejected.
    pub fn from_lists(names: Vec<String>, lists: Vec<Vec<(NodeSet, f64)>>) -> Result<Self> {
        let p = names.len();
        check_names(&names)?;
        if lists.len() != p {
            return Err(Error::Invalid(format!(
                "{} score lists for {} variables",
                lists.len(),
                p
            )));
        }
        let tables = lists
            .into_iter()
            .enumerate()
            .map(|(i, l)| ListedTable::new(i, p, l).map(NodeTable::Listed))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreProvider {
            names,
            tables,
            warnings: Vec::new(),
        })
    }

    pub(crate) fn push_warning(&mut self, w: String) {
        self.warnings.push(w);
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Non-fatal conditions noticed while building the tables.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.p())
    }

    /// `σ(node, parents)`, or [`DISALLOWED`] outside the search space.
    pub fn local_score(&self, node: usize, parents: NodeSet) -> f64 {
        match &self.tables[node] {
            NodeTable::Dense(t) => t.local_score(parents),
            NodeTable::Listed(t) => t.local_score(parents),
        }
    }

    /// `ŝ(node | potential)`: best admissible parent set inside `potential`.
    pub fn best_score(&self, node: usize, potential: NodeSet) -> f64 {
        let potential = potential.without(node);
        match &self.tables[node] {
            NodeTable::Dense(t) => t.best_score(potential),
            NodeTable::Listed(t) => t.best(potential).0,
        }
    }

    /// Like [`best_score`](Self::best_score) but also returns the maximising
    /// parent set, ties broken towards fewer parents and then the
    /// lexicographically smaller set.
    pub fn max_node_score(&self, node: usize, potential: NodeSet) -> (f64, NodeSet) {
        let potential = potential.without(node);
        match &self.tables[node] {
            NodeTable::Dense(t) => t.best(potential),
            NodeTable::Listed(t) => t.best(potential),
        }
    }

    /// Calls `f(parent_set, score)` for every admissible parent set of `node`
    /// with a finite score.
    pub fn for_each_parent_set(&self, node: usize, mut f: impl FnMut(NodeSet, f64)) {
        match &self.tables[node] {
            NodeTable::Dense(t) => t.for_each(&mut f),
            NodeTable::Listed(t) => t.for_each(&mut f),
        }
    }

    /// All admissible parent sets of `node` with finite score, in
    /// (size, lexicographic) order.
    pub fn parent_sets(&self, node: usize) -> Vec<(NodeSet, f64)> {
        let mut v = Vec::new();
        self.for_each_parent_set(node, |s, x| v.push((s, x)));
        v.sort_by(|a, b| a.0.tie_cmp(b.0));
        v
    }

    /// Nodes that appear in at least one admissible parent set of `node`.
    pub fn candidate_parents(&self, node: usize) -> NodeSet {
        match &self.tables[node] {
            NodeTable::Dense(t) => t.candidate_parents(),
            NodeTable::Listed(t) => t.candidate_parents(),
        }
    }

    /// Preselected set and plus-one flag when the node is stored densely.
    pub fn dense_space(&self, node: usize) -> Option<NodeSpace> {
        match &self.tables[node] {
            NodeTable::Dense(t) => Some(t.space()),
            NodeTable::Listed(_) => None,
        }
    }

    /// Score of a DAG given as one parent set per node.
    pub fn dag_score(&self, parents: &[NodeSet]) -> f64 {
        parents
            .iter()
            .enumerate()
            .map(|(i, &pa)| self.local_score(i, pa))
            .sum()
    }
}

fn check_names(names: &[String]) -> Result<()> {
    if names.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    if names.len() > MAX_NODES {
        return Err(Error::Invalid(format!(
            "{} variables exceed the supported maximum of {}",
            names.len(),
            MAX_NODES
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Invalid(format!("duplicate variable name {n:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn names(p: usize) -> Vec<String> {
        (1..=p).map(|i| format!("X{i}")).collect()
    }

    /// Two nodes; each gains 1 from having the other as a parent.
    pub fn two_node() -> ScoreProvider {
        let lists = vec![
            vec![(NodeSet::EMPTY, 0.0), (NodeSet::singleton(1), 1.0)],
            vec![(NodeSet::EMPTY, 0.0), (NodeSet::singleton(0), 1.0)],
        ];
        ScoreProvider::from_lists(names(2), lists).unwrap()
    }

    fn brute_best(sp: &ScoreProvider, node: usize, potential: NodeSet) -> (f64, NodeSet) {
        let mut best = (DISALLOWED, NodeSet::EMPTY);
        let mut first = true;
        sp.for_each_parent_set(node, |s, x| {
            if s.is_subset(potential) && (first || prefer(x, s, best.0, best.1)) {
                best = (x, s);
                first = false;
            }
        });
        best
    }

    #[test]
    fn empty_potential_gives_empty_parent_set() {
        let sp = two_node();
        assert_eq!(sp.max_node_score(0, NodeSet::EMPTY), (0.0, NodeSet::EMPTY));
        assert_eq!(sp.max_node_score(0, NodeSet::singleton(1)), (1.0, NodeSet::singleton(1)));
    }

    #[test]
    fn node_is_never_its_own_parent() {
        let sp = two_node();
        assert_eq!(sp.best_score(0, NodeSet::full(2)), 1.0);
    }

    fn random_space(p: usize, seed: u64) -> SearchSpace {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..p)
            .map(|i| {
                let mut pre = NodeSet::EMPTY;
                for j in 0..p {
                    if j != i && pre.len() < 3 && rng.random_bool(0.5) {
                        pre.insert(j);
                    }
                }
                NodeSpace {
                    preselected: pre,
                    plus1: rng.random_bool(0.7),
                }
            })
            .collect();
        SearchSpace::new(nodes)
    }

    proptest! {
        #[test]
        fn dense_lookup_matches_enumeration(seed in 0u64..500, pot in 0u64..32) {
            use rand::{Rng, SeedableRng};
            let p = 5;
            let space = random_space(p, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let sp = ScoreProvider::from_space(names(p), &space, |_, _| {
                Ok(rng.random_range(-6i32..=6) as f64 / 4.0)
            }).unwrap();
            let potential = NodeSet::from_bits(pot);
            for v in 0..p {
                let got = sp.max_node_score(v, potential);
                let want = brute_best(&sp, v, potential.without(v));
                prop_assert_eq!(got, want);
                prop_assert_eq!(sp.best_score(v, potential), want.0);
                // admissibility of the returned set
                let outside = got.1.difference(space.nodes()[v].preselected);
                prop_assert!(got.1.is_subset(potential));
                prop_assert!(outside.len() <= usize::from(space.nodes()[v].plus1));
            }
        }

        #[test]
        fn best_score_is_monotone(seed in 0u64..200, a in 0u64..32, b in 0u64..32) {
            use rand::{Rng, SeedableRng};
            let p = 5;
            let space = random_space(p, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sp = ScoreProvider::from_space(names(p), &space, |_, _| {
                Ok(rng.random_range(-50.0..50.0))
            }).unwrap();
            let small = NodeSet::from_bits(a & b);
            let large = NodeSet::from_bits(a | b);
            for v in 0..p {
                prop_assert!(sp.best_score(v, small) <= sp.best_score(v, large));
            }
        }
    }
}
