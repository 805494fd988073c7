//! Order-based dynamic programming over suborders.
//!
//! Orders are written left to right; every edge points from a node to one on
//! its left, so a node may take parents only among the nodes to its right.
//! The default search grows *right orders* by adding nodes at their front
//! (left end). The mirrored variant grows *left orders* at their back.

mod dedupe;
mod rules;
mod search;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

pub use rules::{Rule, RuleSet};
pub use search::{Insertion, Search, Suborder};

use crate::error::{Error, Result};
use crate::nodeset::NodeSet;
use crate::scores::ScoreProvider;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Right orders extended at the front.
    #[default]
    Front,
    /// Left orders extended at the back.
    Back,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "front" => Ok(Direction::Front),
            "back" => Ok(Direction::Back),
            _ => Err(format!("unknown direction {s:?} (expected front or back)")),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub rules: RuleSet,
    /// Relative slack for the rules that prune on a strict score
    /// improvement. Absorbs rounding so that float ties stay ties.
    pub epsilon: f64,
    pub direction: Direction,
    /// Worker threads; 0 picks the machine default.
    pub workers: usize,
    /// Evaluate bounds only at stages divisible by this.
    pub bound_every: usize,
    pub dnc: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            rules: RuleSet::all(),
            epsilon: DEFAULT_EPSILON,
            direction: Direction::Front,
            workers: 0,
            bound_every: 1,
            dnc: true,
        }
    }
}

impl SearchConfig {
    /// Plain dynamic programming: deduplication only, no decomposition.
    pub fn exhaustive() -> Self {
        SearchConfig {
            rules: RuleSet::only(&[Rule::Dedup]),
            dnc: false,
            ..Self::default()
        }
    }

    pub fn with_rules(self, rules: RuleSet) -> Self {
        SearchConfig { rules, ..self }
    }
}

/// A sub-problem: order the nodes of `comp` while every node may also take
/// parents from `background`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Problem {
    pub comp: NodeSet,
    pub background: NodeSet,
}

impl Problem {
    pub fn whole(provider: &ScoreProvider) -> Self {
        Problem {
            comp: provider.all_nodes(),
            background: NodeSet::EMPTY,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchStats {
    /// Suborders kept after all pruning, per stage `n = 1..`.
    pub stage_counts: Vec<u64>,
    pub sigma_n: u64,
    /// Orders discarded by each rule, keyed by rule label.
    pub pruned: BTreeMap<String, u64>,
    /// Incumbent improvements from each update, keyed by rule label.
    pub improved: BTreeMap<String, u64>,
    pub bound_evaluations: u64,
    /// Independent searches run (more than one under decomposition).
    pub searches: u64,
    pub wall_ms: f64,
}

impl SearchStats {
    pub(crate) fn count_prune(&mut self, r: Rule, k: u64) {
        if k > 0 {
            *self.pruned.entry(r.label().to_string()).or_default() += k;
        }
    }

    pub(crate) fn count_improve(&mut self, r: Rule) {
        *self.improved.entry(r.label().to_string()).or_default() += 1;
    }

    /// Adds another search's counters; stage counts are summed by stage.
    pub fn absorb(&mut self, other: &SearchStats) {
        if self.stage_counts.len() < other.stage_counts.len() {
            self.stage_counts.resize(other.stage_counts.len(), 0);
        }
        for (a, b) in self.stage_counts.iter_mut().zip(&other.stage_counts) {
            *a += b;
        }
        self.sigma_n += other.sigma_n;
        for (k, v) in &other.pruned {
            *self.pruned.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.improved {
            *self.improved.entry(k.clone()).or_default() += v;
        }
        self.bound_evaluations += other.bound_evaluations;
        self.searches += other.searches;
    }
}

/// A network as one parent set per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    pub parents: Vec<NodeSet>,
    pub score: f64,
}

impl Dag {
    pub fn p(&self) -> usize {
        self.parents.len()
    }

    /// `(child, parent)` pairs sorted by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, pa)| pa.iter().map(move |q| (c, q)))
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        let mut placed = NodeSet::EMPTY;
        loop {
            let next = (0..self.p())
                .find(|&i| !placed.contains(i) && self.parents[i].is_subset(placed));
            match next {
                Some(i) => placed.insert(i),
                None => return placed.len() == self.p(),
            }
        }
    }

    /// `child,parent` rows with a header.
    pub fn to_edge_csv(&self, names: &[String]) -> String {
        let mut s = String::from("child,parent\n");
        for (c, q) in self.edges() {
            writeln!(s, "{},{}", names[c], names[q]).unwrap();
        }
        s
    }

    pub fn to_dot(&self, names: &[String]) -> String {
        let mut s = String::from("digraph G {\n");
        for n in names {
            writeln!(s, "  \"{n}\";").unwrap();
        }
        for (c, q) in self.edges() {
            writeln!(s, "  \"{}\" -> \"{}\";", names[q], names[c]).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Optimal order, left to right.
    pub order: Vec<usize>,
    pub dag: Dag,
    pub score: f64,
    pub stats: SearchStats,
}

/// Score of an order whose nodes may also use `always` as parents, summed
/// from the right end.
pub fn order_score(provider: &ScoreProvider, order: &[usize], always: NodeSet) -> f64 {
    let mut right = always;
    let mut s = 0.0;
    for &v in order.iter().rev() {
        s += provider.best_score(v, right);
        right.insert(v);
    }
    s
}

/// Best parents of every node among the nodes to its right (plus `always`).
/// Nodes outside `order` get no parents.
pub fn extract_dag(provider: &ScoreProvider, order: &[usize], always: NodeSet) -> Dag {
    let mut parents = vec![NodeSet::EMPTY; provider.p()];
    let mut right = always;
    let mut score = 0.0;
    for &v in order.iter().rev() {
        let (s, pa) = provider.max_node_score(v, right);
        parents[v] = pa;
        score += s;
        right.insert(v);
    }
    Dag { parents, score }
}

/// Swaps equal-score neighbours into increasing numerical order until none
/// remain.
pub fn canonicalize(provider: &ScoreProvider, order: &mut [usize], always: NodeSet) {
    let n = order.len();
    if n < 2 {
        return;
    }
    // right[k]: nodes strictly right of position k
    let mut right = vec![always; n];
    for k in (0..n - 1).rev() {
        right[k] = right[k + 1].with(order[k + 1]);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n - 1 {
            let (a, b) = (order[k], order[k + 1]);
            if a < b {
                continue;
            }
            let r = right[k + 1];
            let kept = provider.best_score(a, r.with(b)) + provider.best_score(b, r);
            let swapped = provider.best_score(b, r.with(a)) + provider.best_score(a, r);
            if kept == swapped {
                order.swap(k, k + 1);
                right[k] = r.with(a);
                changed = true;
            }
        }
    }
}

pub(crate) fn worker_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Optimal order of one sub-problem, before canonicalisation.
pub fn search_problem(
    provider: &ScoreProvider,
    problem: Problem,
    cfg: &SearchConfig,
) -> Result<(Vec<usize>, f64, SearchStats)> {
    let mut s = Search::new(provider, problem, cfg)?;
    while s.step() {}
    s.finish()
}

/// Finds an optimal DAG. Uses divide-and-conquer when `cfg.dnc` is set.
pub fn run_search(provider: &ScoreProvider, cfg: &SearchConfig) -> Result<SearchResult> {
    if provider.p() == 0 {
        return Err(Error::EmptyNodeSet);
    }
    let start = Instant::now();
    let pool = worker_pool(cfg.workers);
    let mut result = pool.install(|| {
        if cfg.dnc {
            crate::dnc::dnc_search(provider, cfg)
        } else {
            let (mut order, _, stats) = search_problem(provider, Problem::whole(provider), cfg)?;
            canonicalize(provider, &mut order, NodeSet::EMPTY);
            Ok(finish(provider, order, stats))
        }
    })?;
    result.stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(result)
}

pub(crate) fn finish(provider: &ScoreProvider, order: Vec<usize>, stats: SearchStats) -> SearchResult {
    let dag = extract_dag(provider, &order, NodeSet::EMPTY);
    SearchResult {
        score: dag.score,
        order,
        dag,
        stats,
    }
}
