//! Exhaustive reference implementations for small instances.
//!
//! Maximal node scores are recomputed here from the raw parent-set lists, so
//! nothing depends on the provider's cumulative tables.

use crate::engine::{extract_dag, Dag, Direction, Insertion, Problem};
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;
use crate::scores::ScoreProvider;

/// Largest instance the permutation oracle accepts.
pub const MAX_ORACLE_NODES: usize = 10;

/// `ŝ(i | P)` for every node and every subset, by a subset-max sweep over
/// the listed parent sets.
pub struct BruteScores {
    p: usize,
    vals: Vec<f64>,
}

impl BruteScores {
    pub fn new(provider: &ScoreProvider) -> Result<Self> {
        let p = provider.p();
        guard(p)?;
        let size = 1usize << p;
        let mut vals = vec![f64::NEG_INFINITY; p * size];
        for i in 0..p {
            let row = &mut vals[i * size..(i + 1) * size];
            provider.for_each_parent_set(i, |s, x| {
                let at = s.bits() as usize;
                if x > row[at] {
                    row[at] = x;
                }
            });
            for bit in 0..p {
                for mask in 0..size {
                    if mask >> bit & 1 == 1 && row[mask ^ 1 << bit] > row[mask] {
                        row[mask] = row[mask ^ 1 << bit];
                    }
                }
            }
        }
        Ok(BruteScores { p, vals })
    }

    pub fn shat(&self, node: usize, potential: NodeSet) -> f64 {
        let mask = potential.without(node).bits() as usize;
        self.vals[(node << self.p) + mask]
    }

    /// Order score summed from the right end.
    pub fn order_score(&self, order: &[usize], always: NodeSet) -> f64 {
        let mut right = always;
        let mut s = 0.0;
        for &v in order.iter().rev() {
            s += self.shat(v, right);
            right.insert(v);
        }
        s
    }
}

fn guard(p: usize) -> Result<()> {
    if p > MAX_ORACLE_NODES {
        return Err(Error::TooLarge {
            p,
            limit: MAX_ORACLE_NODES,
        });
    }
    Ok(())
}

/// Steps `v` to the next permutation in lexicographic order.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub score: f64,
    /// All optimal orders, lexicographically sorted.
    pub optimal_orders: Vec<Vec<usize>>,
    /// Lexicographically smallest optimal order.
    pub ooo: Vec<usize>,
    /// Distinct optimal DAGs extracted from the optimal orders.
    pub dags: Vec<Dag>,
}

pub fn brute_force_best_order(provider: &ScoreProvider) -> Result<OracleResult> {
    let p = provider.p();
    if p == 0 {
        return Err(Error::EmptyNodeSet);
    }
    let bs = BruteScores::new(provider)?;
    let mut perm: Vec<usize> = (0..p).collect();
    let mut best = f64::NEG_INFINITY;
    let mut orders: Vec<Vec<usize>> = Vec::new();
    loop {
        let s = bs.order_score(&perm, NodeSet::EMPTY);
        if s > best {
            best = s;
            orders.clear();
        }
        if s == best {
            orders.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Infeasible("every order scores -inf".into()));
    }
    let mut dags: Vec<Dag> = Vec::new();
    for o in &orders {
        let d = extract_dag(provider, o, NodeSet::EMPTY);
        if !dags.iter().any(|x| x.parents == d.parents) {
            dags.push(d);
        }
    }
    Ok(OracleResult {
        score: best,
        ooo: orders[0].clone(),
        optimal_orders: orders,
        dags,
    })
}

/// Best joint score of `i` and `j` given every other node, over both of
/// their relative orders.
pub fn brute_force_pair_score(provider: &ScoreProvider, i: usize, j: usize) -> Result<f64> {
    let bs = BruteScores::new(provider)?;
    let rest = provider.all_nodes().without(i).without(j);
    Ok(bs
        .order_score(&[i, j], rest)
        .max(bs.order_score(&[j, i], rest)))
}

/// Best score of the nodes `nodes` over all their orders when `always`
/// is available as parents to each of them.
pub fn best_completion(provider: &ScoreProvider, nodes: NodeSet, always: NodeSet) -> Result<f64> {
    let bs = BruteScores::new(provider)?;
    let mut perm = nodes.to_vec();
    let mut best = f64::NEG_INFINITY;
    loop {
        best = best.max(bs.order_score(&perm, always));
        if !next_permutation(&mut perm) {
            return Ok(best);
        }
    }
}

/// Score of a left-order layout: `placed` left to right, each node taking
/// parents among nodes to its right, the unplaced `free` nodes and
/// `always`. Summed from the left end.
fn left_score(bs: &BruteScores, placed: &[usize], free: NodeSet, always: NodeSet) -> f64 {
    let mut s = 0.0;
    for (k, &v) in placed.iter().enumerate() {
        let right: NodeSet = placed[k + 1..].iter().copied().collect();
        s += bs.shat(v, right.union(free).union(always));
    }
    s
}

/// From-scratch insertion scores of every dormant node of a suborder whose
/// visible nodes are `visible` (left to right).
pub fn brute_force_insertions(
    provider: &ScoreProvider,
    visible: &[usize],
    problem: Problem,
    dir: Direction,
) -> Result<Vec<(usize, Insertion)>> {
    let bs = BruteScores::new(provider)?;
    let Problem { comp, background } = problem;
    let set: NodeSet = visible.iter().copied().collect();
    let dormant = comp.difference(set);
    let n = visible.len();
    let with_h = |h: usize, pos: usize| {
        let mut v = visible.to_vec();
        v.insert(pos, h);
        v
    };
    let rows = dormant
        .iter()
        .map(|h| {
            let row = match dir {
                Direction::Front => {
                    let score = |o: &[usize]| bs.order_score(o, background);
                    let inside = (1..=n)
                        .map(|pos| score(&with_h(h, pos)))
                        .fold(f64::NEG_INFINITY, f64::max);
                    Insertion {
                        edge: score(&with_h(h, 0)),
                        adjacent: if n > 0 { score(&with_h(h, 1)) } else { f64::NEG_INFINITY },
                        inside,
                        gap: score(visible) + bs.shat(h, comp.union(background).without(h)),
                    }
                }
                Direction::Back => {
                    let free = dormant.without(h);
                    let score = |o: &[usize]| left_score(&bs, o, free, background);
                    let inside = (0..n)
                        .map(|pos| score(&with_h(h, pos)))
                        .fold(f64::NEG_INFINITY, f64::max);
                    Insertion {
                        edge: score(&with_h(h, n)),
                        adjacent: if n > 0 { score(&with_h(h, n - 1)) } else { f64::NEG_INFINITY },
                        inside,
                        gap: left_score(&bs, visible, dormant, background) + bs.shat(h, background),
                    }
                }
            };
            (h, row)
        })
        .collect();
    Ok(rows)
}

/// Whether no neighbouring pair could be swapped into numerical order
/// without changing the score.
pub fn is_canonical(provider: &ScoreProvider, order: &[usize], always: NodeSet) -> Result<bool> {
    let bs = BruteScores::new(provider)?;
    let s = bs.order_score(order, always);
    for k in 0..order.len().saturating_sub(1) {
        if order[k] > order[k + 1] {
            let mut o = order.to_vec();
            o.swap(k, k + 1);
            if bs.order_score(&o, always) == s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
