//! Spanning-tree lower bounds and matching upper bounds on the score of the
//! dormant nodes, plus a polynomial optimality certificate for instances
//! whose optimal network is a matching.
//!
//! For a search problem over component `C` with always-available background
//! `B`:
//!
//! * `F_ij = min(ŝ(i|B∪j) − ŝ(i|B), ŝ(j|B∪i) − ŝ(j|B))` is the guaranteed
//!   gain of linking `i` and `j`. Any spanning tree `T` of the dormant nodes
//!   laid out with children left of parents scores at least
//!   `Σ_T F + Σ ŝ(u|B)`.
//! * `G_ij = Ŝ({i,j} | R) − ŝ(i|R∪j) − ŝ(j|R∪i)` with `R = B ∪ C∖{i,j}`
//!   is the unavoidable loss of a pair (one of the two must sit left of the
//!   other). For any matching `M`, `Σ_M G + Σ ŝ(u|B∪C∖u)` bounds every
//!   completion from above.

use crate::engine::{extract_dag, Dag};
use crate::nodeset::NodeSet;
use crate::scores::ScoreProvider;

/// Pairwise bound matrices for one search problem.
#[derive(Debug, Clone)]
pub struct PairMatrices {
    p: usize,
    f: Vec<f64>,
    g: Vec<f64>,
    lookups: usize,
}

impl PairMatrices {
    pub fn build(provider: &ScoreProvider, comp: NodeSet, background: NodeSet) -> Self {
        let p = provider.p();
        let mut lookups = 0;
        let mut shat = |i: usize, set: NodeSet| {
            lookups += 1;
            provider.best_score(i, set)
        };
        let mut base = vec![0.0; p];
        let mut all = vec![0.0; p];
        let everything = comp.union(background);
        for i in comp {
            base[i] = shat(i, background);
            all[i] = shat(i, everything.without(i));
        }
        let mut f = vec![0.0; p * p];
        let mut g = vec![0.0; p * p];
        let nodes = comp.to_vec();
        for (a, &i) in nodes.iter().enumerate() {
            for &j in &nodes[a + 1..] {
                let gi = shat(i, background.with(j)) - base[i];
                let gj = shat(j, background.with(i)) - base[j];
                let fij = gi.min(gj);
                let fij = if fij.is_finite() { fij } else { 0.0 };
                let rest = everything.without(i).without(j);
                let gij = (shat(j, rest) - all[j]).max(shat(i, rest) - all[i]);
                let gij = if gij.is_nan() { 0.0 } else { gij };
                f[i * p + j] = fij;
                f[j * p + i] = fij;
                g[i * p + j] = gij;
                g[j * p + i] = gij;
            }
        }
        PairMatrices { p, f, g, lookups }
    }

    pub fn f(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.p + j]
    }

    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.p + j]
    }

    /// Maximal-node-score lookups spent building the matrices.
    pub fn lookups(&self) -> usize {
        self.lookups
    }
}

fn square(pm: &PairMatrices, get: fn(&PairMatrices, usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..pm.p)
        .map(|i| (0..pm.p).map(|j| get(pm, i, j)).collect())
        .collect()
}

/// `F` over all nodes with an empty background.
pub fn build_f(provider: &ScoreProvider) -> Vec<Vec<f64>> {
    let pm = PairMatrices::build(provider, provider.all_nodes(), NodeSet::EMPTY);
    square(&pm, PairMatrices::f)
}

/// `G` over all nodes with an empty background.
pub fn build_g(provider: &ScoreProvider) -> Vec<Vec<f64>> {
    let pm = PairMatrices::build(provider, provider.all_nodes(), NodeSet::EMPTY);
    square(&pm, PairMatrices::g)
}

/// Maximum-weight spanning tree of the complete graph on `nodes` (Prim,
/// quadratic). Grows from the lowest node; ties go to the lowest index.
pub fn max_spanning_tree(nodes: NodeSet, w: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let list = nodes.to_vec();
    if list.len() < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; list.len()];
    let mut best = vec![f64::NEG_INFINITY; list.len()];
    let mut link = vec![0usize; list.len()];
    in_tree[0] = true;
    for k in 1..list.len() {
        best[k] = w(list[0], list[k]);
    }
    let mut edges = Vec::with_capacity(list.len() - 1);
    for _ in 1..list.len() {
        let mut pick = usize::MAX;
        for k in 0..list.len() {
            if !in_tree[k] && (pick == usize::MAX || best[k] > best[pick]) {
                pick = k;
            }
        }
        in_tree[pick] = true;
        edges.push((list[link[pick]], list[pick]));
        for k in 0..list.len() {
            if !in_tree[k] {
                let x = w(list[pick], list[k]);
                if x > best[k] {
                    best[k] = x;
                    link[k] = pick;
                }
            }
        }
    }
    edges
}

/// Maximum-weight matching using only edges of the forest `edges`, by
/// dynamic programming over rooted trees. Only strictly positive weights
/// are ever matched. Returns the matching and its weight.
pub fn tree_matching(
    nodes: NodeSet,
    edges: &[(usize, usize)],
    w: impl Fn(usize, usize) -> f64,
) -> (Vec<(usize, usize)>, f64) {
    let size = nodes.last().map_or(0, |l| l + 1);
    let mut adj = vec![Vec::new(); size];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    // dp0: v unmatched; dp1: v matched to the child `pick[v]`
    let mut dp0 = vec![0.0f64; size];
    let mut dp1 = vec![f64::NEG_INFINITY; size];
    let mut pick = vec![usize::MAX; size];
    let mut parent = vec![usize::MAX; size];
    let mut seen = NodeSet::EMPTY;
    let mut matching = Vec::new();
    let mut total = 0.0;
    for root in nodes {
        if seen.contains(root) {
            continue;
        }
        let mut order = vec![root];
        seen.insert(root);
        let mut at = 0;
        while at < order.len() {
            let v = order[at];
            at += 1;
            for &c in &adj[v] {
                if !seen.contains(c) {
                    seen.insert(c);
                    parent[c] = v;
                    order.push(c);
                }
            }
        }
        for &v in order.iter().rev() {
            let children = adj[v].iter().filter(|&&c| parent[c] == v);
            let mut sum = 0.0;
            for &c in children.clone() {
                sum += dp0[c].max(dp1[c]);
            }
            dp0[v] = sum;
            for &c in children {
                let cand = sum - dp0[c].max(dp1[c]) + dp0[c] + w(v, c);
                if w(v, c) > 0.0 && cand > dp1[v] {
                    dp1[v] = cand;
                    pick[v] = c;
                }
            }
        }
        total += dp0[root].max(dp1[root]);
        // read back the choices top-down
        let mut matched = NodeSet::EMPTY;
        for &v in &order {
            if matched.contains(v) {
                continue;
            }
            if pick[v] != usize::MAX && dp1[v] > dp0[v] {
                let c = pick[v];
                matched.insert(v);
                matched.insert(c);
                matching.push((v.min(c), v.max(c)));
            }
        }
    }
    (matching, total)
}

/// Best spanning tree of the dormant nodes and the lower bound
/// `Σ_T F + Σ ŝ(u|B)` on their completion score. `base[u] = ŝ(u|B)`.
pub fn tree_bound(
    pm: &PairMatrices,
    dormant: NodeSet,
    base: &[f64],
) -> (Vec<(usize, usize)>, f64) {
    let tree = max_spanning_tree(dormant, |i, j| pm.f(i, j));
    let f = tree.iter().map(|&(i, j)| pm.f(i, j)).sum::<f64>()
        + dormant.iter().map(|u| base[u]).sum::<f64>();
    (tree, f)
}

/// Matching inside `tree` minimising `Σ_M G`, and the upper bound
/// `Σ_M G + Σ ŝ(u|B∪C∖u)` on the completion score. `all[u] = ŝ(u|B∪C∖u)`.
pub fn matching_bound(
    pm: &PairMatrices,
    tree: &[(usize, usize)],
    dormant: NodeSet,
    all: &[f64],
) -> (Vec<(usize, usize)>, f64) {
    let top: f64 = dormant.iter().map(|u| all[u]).sum();
    if let Some(&(i, j)) = tree.iter().find(|&&(i, j)| pm.g(i, j) == f64::NEG_INFINITY) {
        return (vec![(i.min(j), i.max(j))], f64::NEG_INFINITY);
    }
    let (m, _) = tree_matching(dormant, tree, |i, j| -pm.g(i, j));
    let loss: f64 = m.iter().map(|&(i, j)| pm.g(i, j)).sum();
    (m, top + loss)
}

/// Left-to-right layout of a spanning tree with every node left of its tree
/// parent: reverse breadth-first order from the lowest node.
pub fn tree_layout(dormant: NodeSet, tree: &[(usize, usize)]) -> Vec<usize> {
    let Some(root) = dormant.first() else {
        return Vec::new();
    };
    let mut order = vec![root];
    let mut seen = NodeSet::singleton(root);
    let mut at = 0;
    while at < order.len() {
        let v = order[at];
        at += 1;
        let mut next: Vec<usize> = tree
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .filter(|c| !seen.contains(*c))
            .collect();
        next.sort_unstable();
        for c in next {
            seen.insert(c);
            order.push(c);
        }
    }
    // disconnected leftovers (not produced by a spanning tree)
    order.extend(dormant.difference(seen));
    order.reverse();
    order
}

/// A* pruning: no completion can beat the incumbent.
pub fn astar_prune(score: f64, g: f64, best: f64) -> bool {
    score + g <= best
}

/// Optimality pruning: the tree completion attains the upper bound.
pub fn optimality_prune(f: f64, g: f64) -> bool {
    f == g
}

/// Proof that a matching network is globally optimal.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub dag: Dag,
    /// Matched pairs `(i, j)` with `i < j`.
    pub matching: Vec<(usize, usize)>,
    pub f: f64,
    pub g: f64,
    /// Maximal-node-score lookups spent.
    pub lookups: usize,
}

/// Tries to certify that the optimal network is a matching, using only
/// quadratically many score lookups. `tol` absorbs floating-point noise in
/// the equalities (0 for exact tables).
pub fn matching_certificate(provider: &ScoreProvider, tol: f64) -> Option<Certificate> {
    let all_nodes = provider.all_nodes();
    let pm = PairMatrices::build(provider, all_nodes, NodeSet::EMPTY);
    let tree = max_spanning_tree(all_nodes, |i, j| pm.f(i, j));
    let kept: Vec<(usize, usize)> = tree
        .into_iter()
        .filter(|&(i, j)| pm.f(i, j) != 0.0)
        .map(|(i, j)| (i.min(j), i.max(j)))
        .collect();
    let mut touched = NodeSet::EMPTY;
    for &(i, j) in &kept {
        if touched.contains(i) || touched.contains(j) {
            return None;
        }
        touched.insert(i);
        touched.insert(j);
    }
    let p = provider.p();
    for i in 0..p {
        for k in i + 1..p {
            let matched = kept.contains(&(i, k));
            let ok = if matched {
                (pm.g(i, k) + pm.f(i, k)).abs() <= tol
            } else {
                pm.g(i, k).abs() <= tol && pm.f(i, k).abs() <= tol
            };
            if !ok {
                return None;
            }
        }
    }
    let mut lookups = pm.lookups();
    let mut base_sum = 0.0;
    let mut all_sum = 0.0;
    for u in 0..p {
        base_sum += provider.best_score(u, NodeSet::EMPTY);
        all_sum += provider.best_score(u, all_nodes.without(u));
        lookups += 2;
    }
    let f = kept.iter().map(|&(i, j)| pm.f(i, j)).sum::<f64>() + base_sum;
    let g = kept.iter().map(|&(i, j)| pm.g(i, j)).sum::<f64>() + all_sum;
    if (f - g).abs() > tol {
        return None;
    }
    // each pair laid out child-then-parent, the better orientation first
    let mut order = Vec::with_capacity(p);
    for &(i, j) in &kept {
        let i_child = provider.best_score(i, NodeSet::singleton(j)) + provider.best_score(j, NodeSet::EMPTY);
        let j_child = provider.best_score(j, NodeSet::singleton(i)) + provider.best_score(i, NodeSet::EMPTY);
        lookups += 4;
        if j_child > i_child {
            order.extend([j, i]);
        } else {
            order.extend([i, j]);
        }
    }
    order.extend(all_nodes.difference(touched));
    let dag = extract_dag(provider, &order, NodeSet::EMPTY);
    lookups += p;
    if !(dag.score >= g - tol) {
        return None;
    }
    Some(Certificate {
        dag,
        matching: kept,
        f,
        g,
        lookups,
    })
}
