//! Divide and conquer.
//!
//! `Hmax[i][j]` is the largest score change node `i` can get from adding
//! `j` to an admissible parent set, `Hmin[i][j]` the smallest. Nodes that
//! are not linked through `Hmax > 0` can never share an edge in an optimal
//! DAG, so the connected components of `Hmax > 0` are solved on their own.
//! Inside each, the components of `Hmin > 0` are searched separately with
//! the rest of the enclosing component as fixed potential parents. When the
//! resulting fragments depend on each other cyclically, the cycle is merged
//! and re-searched.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::engine::{
    canonicalize, extract_dag, finish, search_problem, Problem, SearchConfig, SearchResult,
    SearchStats,
};
use crate::error::Result;
use crate::nodeset::NodeSet;
use crate::scores::ScoreProvider;

#[derive(Debug, Clone, PartialEq)]
pub struct HMatrices {
    p: usize,
    hmax: Vec<f64>,
    hmin: Vec<f64>,
}

impl HMatrices {
    pub fn hmax(&self, i: usize, j: usize) -> f64 {
        self.hmax[i * self.p + j]
    }

    pub fn hmin(&self, i: usize, j: usize) -> f64 {
        self.hmin[i * self.p + j]
    }
}

/// Builds `Hmax` and `Hmin`. When `S∖{j}` is not itself admissible (listed
/// tables), `Hmax` compares against the best admissible subset of `S∖{j}`
/// and `Hmin` falls back to `Hmax`. Pairs where `j` never appears as a
/// parent of `i` get 0.
pub fn build_h(provider: &ScoreProvider) -> HMatrices {
    let p = provider.p();
    let mut hmax = vec![f64::NEG_INFINITY; p * p];
    let mut hmin = vec![f64::INFINITY; p * p];
    for i in 0..p {
        let row = i * p;
        provider.for_each_parent_set(i, |s, x| {
            for j in s {
                let rest = s.without(j);
                let y = provider.local_score(i, rest);
                if y > f64::NEG_INFINITY {
                    let d = x - y;
                    hmax[row + j] = hmax[row + j].max(d);
                    hmin[row + j] = hmin[row + j].min(d);
                } else {
                    let d = x - provider.best_score(i, rest);
                    hmax[row + j] = hmax[row + j].max(d);
                }
            }
        });
        for j in 0..p {
            let (a, b) = (&mut hmax[row + j], &mut hmin[row + j]);
            if *a == f64::NEG_INFINITY {
                *a = 0.0;
                *b = 0.0;
            } else {
                *b = b.min(*a);
            }
        }
    }
    HMatrices { p, hmax, hmin }
}

/// Connected components of the graph linking `i` and `j` when
/// `positive(i, j)` or `positive(j, i)`, ordered by smallest node.
fn components(p: usize, positive: impl Fn(usize, usize) -> bool) -> Vec<NodeSet> {
    let mut root: Vec<usize> = (0..p).collect();
    fn find(root: &mut [usize], mut x: usize) -> usize {
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    for i in 0..p {
        for j in i + 1..p {
            if positive(i, j) || positive(j, i) {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                root[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<NodeSet> = Vec::new();
    let mut slot = vec![usize::MAX; p];
    for v in 0..p {
        let r = find(&mut root, v);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(NodeSet::EMPTY);
        }
        out[slot[r]].insert(v);
    }
    out
}

pub fn upper_components(h: &HMatrices) -> Vec<NodeSet> {
    components(h.p, |i, j| h.hmax(i, j) > 0.0)
}

pub fn lower_components(h: &HMatrices) -> Vec<NodeSet> {
    components(h.p, |i, j| h.hmin(i, j) > 0.0)
}

/// Trace of one decomposed run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DncTrace {
    pub upper: Vec<NodeSet>,
    pub lower: Vec<NodeSet>,
    /// Final parts of every upper component, in layout order.
    pub parts: Vec<NodeSet>,
    pub merges: usize,
}

pub fn dnc_search(provider: &ScoreProvider, cfg: &SearchConfig) -> Result<SearchResult> {
    dnc_search_traced(provider, cfg).map(|(r, _)| r)
}

pub fn dnc_search_traced(
    provider: &ScoreProvider,
    cfg: &SearchConfig,
) -> Result<(SearchResult, DncTrace)> {
    let p = provider.p();
    let h = build_h(provider);
    let upper = upper_components(&h);
    let lower = lower_components(&h);
    for l in &lower {
        assert!(
            upper.iter().filter(|u| l.is_subset(**u)).count() == 1,
            "lower component {l:?} not nested in an upper component"
        );
    }
    let mut trace = DncTrace {
        upper: upper.clone(),
        lower: lower.clone(),
        ..DncTrace::default()
    };
    let mut stats = SearchStats::default();
    let mut cache: HashMap<NodeSet, Vec<usize>> = HashMap::new();
    let mut order = Vec::with_capacity(p);

    for &u in &upper {
        let mut parts: Vec<NodeSet> = lower.iter().copied().filter(|l| l.is_subset(u)).collect();
        let mut rounds = 0;
        let parents = loop {
            rounds += 1;
            assert!(rounds <= p + 1, "merge loop did not terminate");
            let todo: Vec<NodeSet> = parts.iter().copied().filter(|a| !cache.contains_key(a)).collect();
            let solved = todo
                .par_iter()
                .map(|&a| {
                    let problem = Problem {
                        comp: a,
                        background: u.difference(a),
                    };
                    search_problem(provider, problem, cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            for (a, (o, _, s)) in todo.into_iter().zip(solved) {
                stats.absorb(&s);
                cache.insert(a, o);
            }

            // parent parts of each part
            let part_of = |v: usize| parts.iter().position(|a| a.contains(v));
            let mut parents = vec![Vec::new(); parts.len()];
            let mut graph = DiGraph::<(), ()>::new();
            let ids: Vec<_> = parts.iter().map(|_| graph.add_node(())).collect();
            for (k, &a) in parts.iter().enumerate() {
                let frag = extract_dag(provider, &cache[&a], u.difference(a));
                let mut from = Vec::new();
                for v in a {
                    for q in frag.parents[v] {
                        let b = part_of(q).expect("parent inside the upper component");
                        if b != k && !from.contains(&b) {
                            from.push(b);
                        }
                    }
                }
                from.sort_unstable();
                for &b in &from {
                    graph.add_edge(ids[b], ids[k], ());
                }
                parents[k] = from;
            }
            let cycles: Vec<NodeSet> = tarjan_scc(&graph)
                .into_iter()
                .filter(|c| c.len() > 1)
                .map(|c| c.iter().map(|ix| parts[ix.index()]).fold(NodeSet::EMPTY, NodeSet::union))
                .collect();
            if cycles.is_empty() {
                break parents;
            }
            trace.merges += cycles.len();
            let mut merged: Vec<NodeSet> = parts
                .iter()
                .copied()
                .filter(|a| !cycles.iter().any(|c| a.is_subset(*c)))
                .collect();
            merged.extend(cycles);
            merged.sort_by_key(|a| a.first());
            parts = merged;
        };

        // children left of their parents, ties to the smallest node
        let mut placed = vec![false; parts.len()];
        for _ in 0..parts.len() {
            let next = (0..parts.len())
                .filter(|&k| !placed[k])
                .filter(|&k| (0..parts.len()).all(|c| placed[c] || !parents[c].contains(&k)))
                .min_by_key(|&k| parts[k].first())
                .expect("component graph is acyclic");
            placed[next] = true;
            order.extend_from_slice(&cache[&parts[next]]);
            trace.parts.push(parts[next]);
        }
    }

    stats.sigma_n = stats.stage_counts.iter().sum();
    canonicalize(provider, &mut order, NodeSet::EMPTY);
    Ok((finish(provider, order, stats), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing;

    #[test]
    fn all_zero_h_vanishes() {
        let h = build_h(&testing::all_zero(5));
        assert!(h.hmax.iter().chain(&h.hmin).all(|&x| x == 0.0));
        assert_eq!(upper_components(&h).len(), 5);
        assert_eq!(lower_components(&h).len(), 5);
    }

    #[test]
    fn two_node_h() {
        let h = build_h(&testing::two_node());
        assert_eq!((h.hmax(0, 1), h.hmin(0, 1)), (1.0, 1.0));
        assert_eq!(upper_components(&h), vec![NodeSet::full(2)]);
        assert_eq!(lower_components(&h), vec![NodeSet::full(2)]);
    }

    #[test]
    fn block_diagonal_splits() {
        for seed in 0..10 {
            let h = build_h(&testing::block_diagonal(seed));
            let up = upper_components(&h);
            assert!(up.len() >= 2, "seed {seed}: {up:?}");
            assert!(up.iter().all(|c| c.is_subset(NodeSet::full(3)) || c.is_disjoint(NodeSet::full(3))));
        }
    }
}
