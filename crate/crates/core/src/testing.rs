//! Small synthetic score tables for tests and benchmarks.
//!
//! Random scores are multiples of 1/8 so that sums are exact and score ties
//! are common.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nodeset::NodeSet;
use crate::scores::{NodeSpace, ScoreProvider, SearchSpace};

pub fn names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

fn dyadic(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 8.0
}

/// All subsets of `pool` with at most `k` elements.
pub fn subsets_up_to(pool: NodeSet, k: usize) -> Vec<NodeSet> {
    let items = pool.to_vec();
    let mut out = vec![NodeSet::EMPTY];
    for &v in &items {
        let grown: Vec<NodeSet> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| s.with(v))
            .collect();
        out.extend(grown);
    }
    out
}

/// Two nodes, each gaining 1 from the other as parent.
pub fn two_node() -> ScoreProvider {
    let lists = vec![
        vec![(NodeSet::EMPTY, 0.0), (NodeSet::singleton(1), 1.0)],
        vec![(NodeSet::EMPTY, 0.0), (NodeSet::singleton(0), 1.0)],
    ];
    ScoreProvider::from_lists(names(2), lists).unwrap()
}

/// Every parent set scores 0; each node may take one arbitrary parent.
pub fn all_zero(p: usize) -> ScoreProvider {
    let space = SearchSpace::new(vec![
        NodeSpace {
            preselected: NodeSet::EMPTY,
            plus1: true,
        };
        p
    ]);
    ScoreProvider::from_space(names(p), &space, |_, _| Ok(0.0)).unwrap()
}

/// Chain `X1 ← X2 ← X3` with strong edges; its optimum is not a matching.
pub fn chain3() -> ScoreProvider {
    let all = NodeSet::full(3);
    let lists = (0..3)
        .map(|i| {
            subsets_up_to(all.without(i), 2)
                .into_iter()
                .map(|s| {
                    let linked = [i.wrapping_sub(1), i + 1]
                        .into_iter()
                        .filter(|&j| j < 3 && s.contains(j))
                        .count() as f64;
                    (s, 4.0 * linked - s.len() as f64)
                })
                .collect()
        })
        .collect();
    ScoreProvider::from_lists(names(3), lists).unwrap()
}

/// Independent rugged scores for every parent set of at most `k` nodes.
pub fn rugged(p: usize, k: usize, seed: u64) -> ScoreProvider {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = NodeSet::full(p);
    let lists = (0..p)
        .map(|i| {
            subsets_up_to(all.without(i), k)
                .into_iter()
                .map(|s| (s, dyadic(&mut rng, -8, 8) - s.len() as f64 / 2.0))
                .collect()
        })
        .collect();
    ScoreProvider::from_lists(names(p), lists).unwrap()
}

/// Scores rewarding the parents of a hidden random DAG with expected
/// neighbourhood size `density`, over all parent sets of at most `k` nodes.
pub fn structured(p: usize, density: f64, k: usize, seed: u64) -> ScoreProvider {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let prob = if p > 1 { (density / (p - 1) as f64).min(1.0) } else { 0.0 };
    let mut truth = vec![NodeSet::EMPTY; p];
    let mut weight = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in a + 1..p {
            if rng.random_bool(prob) {
                // perm[b] is the parent of perm[a]
                truth[perm[a]].insert(perm[b]);
                weight[perm[a]][perm[b]] = dyadic(&mut rng, 4, 24);
                weight[perm[b]][perm[a]] = dyadic(&mut rng, 2, 16);
            }
        }
    }
    let all = NodeSet::full(p);
    let lists = (0..p)
        .map(|i| {
            subsets_up_to(all.without(i), k)
                .into_iter()
                .map(|s| {
                    let gain: f64 = s.iter().map(|j| weight[i][j]).sum();
                    let noise = dyadic(&mut rng, -2, 2) * f64::from(!s.is_empty());
                    (s, gain - s.len() as f64 + noise)
                })
                .collect()
        })
        .collect();
    ScoreProvider::from_lists(names(p), lists).unwrap()
}

/// Random preselected sets of at most `k` nodes with optional plus-one
/// parents, stored densely.
pub fn random_dense(p: usize, k: usize, seed: u64) -> ScoreProvider {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..p)
        .map(|i| {
            let mut pre = NodeSet::EMPTY;
            for j in 0..p {
                if j != i && pre.len() < k && rng.random_bool(0.5) {
                    pre.insert(j);
                }
            }
            NodeSpace {
                preselected: pre,
                plus1: rng.random_bool(0.7),
            }
        })
        .collect();
    let space = SearchSpace::new(nodes);
    ScoreProvider::from_space(names(p), &space, |_, s| {
        Ok(dyadic(&mut rng, -8, 8) - s.len() as f64 / 2.0)
    })
    .unwrap()
}

/// Instance number `seed` of the standard mixed family: `p = 4..=7`,
/// at most 3 parents, rotating between rugged, structured and dense tables.
pub fn random_instance(seed: u64) -> ScoreProvider {
    let p = 4 + (seed % 4) as usize;
    let k = 1 + (seed / 4 % 3) as usize;
    match seed % 3 {
        0 => rugged(p, k, seed),
        1 => structured(p, 1.5, k, seed),
        _ => random_dense(p, k, seed),
    }
}

/// Two independent 3-node systems on nodes `{0,1,2}` and `{3,4,5}`.
pub fn block_diagonal(seed: u64) -> ScoreProvider {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = NodeSet::full(3);
    let w: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..6).map(|_| dyadic(&mut rng, 0, 16)).collect())
        .collect();
    let lists = (0..6)
        .map(|i| {
            let block = if i < 3 { low } else { NodeSet::full(6).difference(low) };
            subsets_up_to(NodeSet::full(6).without(i), 2)
                .into_iter()
                .map(|s| {
                    let inside = s.intersection(block);
                    let gain: f64 = inside.iter().map(|j| w[i][j] - 0.5).sum();
                    (s, gain - s.difference(block).len() as f64)
                })
                .collect()
        })
        .collect();
    ScoreProvider::from_lists(names(6), lists).unwrap()
}
