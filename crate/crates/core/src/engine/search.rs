//! Stage-by-stage suborder expansion with pruning and bounds.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::dedupe::dedupe;
use super::{order_score, Direction, Problem, Rule, SearchConfig, SearchStats};
use crate::bounds::{matching_bound, tree_bound, tree_layout, PairMatrices};
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;
use crate::scores::ScoreProvider;

/// Scores of placing one dormant node relative to a suborder.
///
/// For a right order `v` (visible nodes, front first) and dormant `h`:
/// `edge` places `h` at the front, `adjacent` directly behind the front,
/// `inside` is the best position behind the front, and `gap` is the order
/// score plus the best score of `h` given every other node.
///
/// For a left order: `edge` places `h` at the back with the other dormant
/// nodes still to its right, `adjacent` directly before the back, `inside`
/// is the best position before the back, and `gap` is the order score plus
/// the score of `h` with no parents from the component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub edge: f64,
    pub adjacent: f64,
    pub inside: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suborder {
    /// Visible nodes in the order they were added.
    pub seq: Vec<usize>,
    pub set: NodeSet,
    pub score: f64,
    /// One entry per dormant node, ascending.
    pub table: Vec<Insertion>,
}

impl Suborder {
    /// Most recently added node.
    pub fn tip(&self) -> Option<usize> {
        self.seq.last().copied()
    }

    /// Visible nodes left to right.
    pub fn left_to_right(&self, dir: Direction) -> Vec<usize> {
        match dir {
            Direction::Front => self.seq.iter().rev().copied().collect(),
            Direction::Back => self.seq.clone(),
        }
    }

    /// Table entry of dormant node `h` within component `comp`.
    pub fn entry(&self, comp: NodeSet, h: usize) -> &Insertion {
        &self.table[comp.difference(self.set).rank(h)]
    }
}

struct Candidate {
    parent: usize,
    seq: Vec<usize>,
    set: NodeSet,
    score: f64,
}

type Counts = [u64; Rule::ALL.len()];

struct BoundEval {
    upper: f64,
    updates: Vec<(Rule, f64, Vec<usize>)>,
    certified: bool,
}

/// Search state for one problem. Call [`step`](Self::step) until it returns
/// `false`, then [`finish`](Self::finish).
pub struct Search<'a> {
    provider: &'a ScoreProvider,
    problem: Problem,
    cfg: SearchConfig,
    /// `ŝ(h | B)`
    base: Vec<f64>,
    /// `ŝ(h | B ∪ C∖h)`
    all: Vec<f64>,
    pairs: Option<PairMatrices>,
    stage: Vec<Suborder>,
    n: usize,
    best: Option<(f64, Vec<usize>)>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    pub fn new(provider: &'a ScoreProvider, problem: Problem, cfg: &SearchConfig) -> Result<Self> {
        let Problem { comp, background } = problem;
        if comp.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        let p = provider.p();
        let mut base = vec![f64::NEG_INFINITY; p];
        let mut all = vec![f64::NEG_INFINITY; p];
        for h in comp {
            base[h] = provider.best_score(h, background);
            all[h] = provider.best_score(h, background.union(comp).without(h));
            if all[h] == f64::NEG_INFINITY {
                return Err(Error::Infeasible(format!(
                    "node {} has no admissible parent set",
                    provider.names()[h]
                )));
            }
        }
        let pairs = cfg
            .rules
            .uses_bounds()
            .then(|| PairMatrices::build(provider, comp, background));
        let table = comp
            .iter()
            .map(|h| match cfg.direction {
                Direction::Front => Insertion {
                    edge: base[h],
                    adjacent: f64::NEG_INFINITY,
                    inside: f64::NEG_INFINITY,
                    gap: all[h],
                },
                Direction::Back => Insertion {
                    edge: all[h],
                    adjacent: f64::NEG_INFINITY,
                    inside: f64::NEG_INFINITY,
                    gap: base[h],
                },
            })
            .collect();
        let empty = Suborder {
            seq: Vec::new(),
            set: NodeSet::EMPTY,
            score: 0.0,
            table,
        };
        Ok(Search {
            provider,
            problem,
            cfg: *cfg,
            base,
            all,
            pairs,
            stage: vec![empty],
            n: 0,
            best: None,
            stats: SearchStats {
                searches: 1,
                ..SearchStats::default()
            },
        })
    }

    /// Current stage length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stage(&self) -> &[Suborder] {
        &self.stage
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    /// Best full order found by the bound updates so far, left to right.
    pub fn incumbent(&self) -> Option<(f64, &[usize])> {
        self.best.as_ref().map(|(s, o)| (*s, o.as_slice()))
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    fn on(&self, r: Rule) -> bool {
        self.cfg.rules.contains(r)
    }

    fn shat(&self, h: usize, set: NodeSet) -> f64 {
        self.provider.best_score(h, set.union(self.problem.background))
    }

    /// Advances one stage. Returns `false` once every node is placed.
    pub fn step(&mut self) -> bool {
        let comp = self.problem.comp;
        if self.n == comp.len() {
            return false;
        }
        let mut counts: Counts = [0; Rule::ALL.len()];

        let expanded: Vec<(Vec<Candidate>, Counts)> = self
            .stage
            .par_iter()
            .enumerate()
            .map(|(pi, m)| self.expand(pi, m))
            .collect();
        let mut cands = Vec::new();
        for (c, k) in expanded {
            cands.extend(c);
            add(&mut counts, &k);
        }

        let produced = cands.len() as u64;
        if self.on(Rule::Dedup) {
            let dir = self.cfg.direction;
            cands = dedupe(cands, comp, |c| c.set, |a, b| better(dir, a, b));
        }
        counts[Rule::Dedup as usize] += produced - cands.len() as u64;

        let children: Vec<(Option<Suborder>, Counts)> = cands
            .into_par_iter()
            .map(|c| self.realise(c))
            .collect();
        let mut next = Vec::with_capacity(children.len());
        for (c, k) in children {
            add(&mut counts, &k);
            next.extend(c);
        }
        self.n += 1;

        let every = self.cfg.bound_every.max(1);
        if self.pairs.is_some() && self.n < comp.len() && self.n % every == 0 {
            next = self.apply_bounds(next, &mut counts);
        }

        for r in Rule::ALL {
            self.stats.count_prune(r, counts[r as usize]);
        }
        self.stats.stage_counts.push(next.len() as u64);
        self.stage = next;
        true
    }

    fn expand(&self, pi: usize, m: &Suborder) -> (Vec<Candidate>, Counts) {
        let comp = self.problem.comp;
        let dormant = comp.difference(m.set);
        let eps = self.cfg.epsilon;
        let mut counts: Counts = [0; Rule::ALL.len()];
        let mut out = Vec::new();
        let mut allowed = dormant;
        if self.cfg.direction == Direction::Front && self.on(Rule::NoRightGaps) {
            let free = dormant
                .iter()
                .zip(&m.table)
                .filter(|(_, e)| e.edge == e.gap)
                .map(|(h, _)| h)
                .last();
            if let Some(mx) = free {
                allowed = dormant.iter().filter(|&h| h >= mx).collect();
                counts[Rule::NoRightGaps as usize] += (dormant.len() - allowed.len()) as u64;
            }
        }
        for (j, e) in dormant.iter().zip(&m.table) {
            if !allowed.contains(j) {
                continue;
            }
            let pruned = match self.cfg.direction {
                Direction::Front => {
                    if self.on(Rule::OptimalFront) && beats(e.inside, e.edge, eps) {
                        Some(Rule::OptimalFront)
                    } else if self.on(Rule::OrderedFront)
                        && m.tip().is_some_and(|front| j > front)
                        && e.adjacent == e.edge
                    {
                        Some(Rule::OrderedFront)
                    } else {
                        None
                    }
                }
                Direction::Back => {
                    if self.on(Rule::NoLeftGaps)
                        && e.edge == e.gap
                        && dormant.without(j).first().is_some_and(|h| h < j)
                    {
                        Some(Rule::NoLeftGaps)
                    } else if self.on(Rule::OptimalBack) && beats(e.inside, e.edge, eps) {
                        Some(Rule::OptimalBack)
                    } else if self.on(Rule::OrderedBack)
                        && m.tip().is_some_and(|back| j < back)
                        && e.adjacent == e.edge
                    {
                        Some(Rule::OrderedBack)
                    } else {
                        None
                    }
                }
            };
            if let Some(r) = pruned {
                counts[r as usize] += 1;
                continue;
            }
            if e.edge == f64::NEG_INFINITY {
                continue;
            }
            let mut seq = Vec::with_capacity(m.seq.len() + 1);
            seq.extend_from_slice(&m.seq);
            seq.push(j);
            out.push(Candidate {
                parent: pi,
                seq,
                set: m.set.with(j),
                score: e.edge,
            });
        }
        (out, counts)
    }

    /// Builds the insertion table of a candidate and applies the rules that
    /// need it.
    fn realise(&self, c: Candidate) -> (Option<Suborder>, Counts) {
        let mut counts: Counts = [0; Rule::ALL.len()];
        let comp = self.problem.comp;
        let m = &self.stage[c.parent];
        let j = *c.seq.last().expect("non-empty");
        let dormant = comp.difference(c.set);
        let s = c.score;
        let table: Vec<Insertion> = match self.cfg.direction {
            Direction::Front => dormant
                .iter()
                .map(|h| {
                    let me = m.entry(comp, h);
                    let a = self.shat(j, m.set.with(h));
                    Insertion {
                        edge: s + self.shat(h, c.set),
                        adjacent: a + me.edge,
                        inside: a + me.edge.max(me.inside),
                        gap: s + self.all[h],
                    }
                })
                .collect(),
            Direction::Back => dormant
                .iter()
                .map(|h| {
                    let me = m.entry(comp, h);
                    let a = self.shat(j, dormant.without(h));
                    Insertion {
                        edge: s + self.shat(h, dormant.without(h)),
                        adjacent: me.edge + a,
                        inside: a + me.edge.max(me.inside),
                        gap: s + self.base[h],
                    }
                })
                .collect(),
        };
        if self.cfg.direction == Direction::Front {
            let eps = self.cfg.epsilon;
            if self.on(Rule::DormantGap) && table.iter().any(|e| beats(e.inside, e.gap, eps)) {
                counts[Rule::DormantGap as usize] += 1;
                return (None, counts);
            }
            if self.on(Rule::OrderedDormantGap)
                && dormant
                    .iter()
                    .zip(&table)
                    .any(|(h, e)| h > j && e.adjacent == e.gap)
            {
                counts[Rule::OrderedDormantGap as usize] += 1;
                return (None, counts);
            }
        }
        let order = Suborder {
            seq: c.seq,
            set: c.set,
            score: s,
            table,
        };
        (Some(order), counts)
    }

    /// Full order made of `completion` on the dormant side of `order`.
    fn complete(&self, order: &Suborder, completion: Vec<usize>) -> Vec<usize> {
        let visible = order.left_to_right(self.cfg.direction);
        match self.cfg.direction {
            Direction::Front => completion.into_iter().chain(visible).collect(),
            Direction::Back => visible.into_iter().chain(completion).collect(),
        }
    }

    fn evaluate_bounds(
        &self,
        order: &Suborder,
        pm: &PairMatrices,
        snapshot: &Option<(f64, Vec<usize>)>,
    ) -> BoundEval {
        let comp = self.problem.comp;
        let dormant = comp.difference(order.set);
        let (tree, f) = tree_bound(pm, dormant, &self.base);
        let (_, g) = matching_bound(pm, &tree, dormant, &self.all);
        let upper = order.score + g;
        let incumbent = snapshot.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
        let mut updates = Vec::new();
        let tree_update = self.on(Rule::TreeUpdate) && order.score + f > incumbent;
        if tree_update || (self.on(Rule::Optimality) && f == g) {
            let full = self.complete(order, tree_layout(dormant, &tree));
            let score = order_score(self.provider, &full, self.problem.background);
            let label = if tree_update { Rule::TreeUpdate } else { Rule::Optimality };
            updates.push((label, score, full));
        }
        if let (true, Some((_, best))) = (self.on(Rule::ConcatUpdate), snapshot) {
            let rest: Vec<usize> = best.iter().copied().filter(|&v| !order.set.contains(v)).collect();
            let full = self.complete(order, rest);
            let score = order_score(self.provider, &full, self.problem.background);
            updates.push((Rule::ConcatUpdate, score, full));
        }
        let certified = self.on(Rule::Optimality) && updates.iter().any(|u| u.1 >= upper);
        BoundEval {
            upper,
            updates,
            certified,
        }
    }

    fn apply_bounds(&mut self, orders: Vec<Suborder>, counts: &mut Counts) -> Vec<Suborder> {
        let pm = self.pairs.as_ref().expect("bounds enabled");
        let snapshot = self.best.clone();
        let evals: Vec<BoundEval> = orders
            .par_iter()
            .map(|o| self.evaluate_bounds(o, pm, &snapshot))
            .collect();
        self.stats.bound_evaluations += evals.len() as u64;
        for ev in &evals {
            for (rule, score, full) in &ev.updates {
                let current = self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
                if *score > current {
                    self.best = Some((*score, full.clone()));
                    self.stats.count_improve(*rule);
                }
            }
        }
        let incumbent = self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
        let astar = self.on(Rule::AStar);
        orders
            .into_iter()
            .zip(evals)
            .filter(|(_, ev)| {
                if ev.certified {
                    counts[Rule::Optimality as usize] += 1;
                    false
                } else if astar && ev.upper <= incumbent {
                    counts[Rule::AStar as usize] += 1;
                    false
                } else {
                    true
                }
            })
            .map(|(o, _)| o)
            .collect()
    }

    /// Best full order of the component (left to right), its score and the
    /// statistics.
    pub fn finish(mut self) -> Result<(Vec<usize>, f64, SearchStats)> {
        while self.step() {}
        let dir = self.cfg.direction;
        let last = self.stage.first().map(|o| (o.score, o.left_to_right(dir)));
        let chosen = match (last, self.best.take()) {
            (Some(a), Some(b)) => Some(if a.0 >= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self.stats.sigma_n = self.stats.stage_counts.iter().sum();
        match chosen {
            Some((score, order)) if score > f64::NEG_INFINITY => Ok((order, score, self.stats)),
            _ => Err(Error::Infeasible(
                "every order of the component has score -inf".into(),
            )),
        }
    }
}

/// `a > b` by more than `eps` relative to `b`.
fn beats(a: f64, b: f64, eps: f64) -> bool {
    if b.is_finite() {
        a > b + eps * b.abs().max(1.0)
    } else {
        a > b
    }
}

fn add(acc: &mut Counts, k: &Counts) {
    for (a, b) in acc.iter_mut().zip(k) {
        *a += b;
    }
}

/// Higher score, then the lexicographically smaller left-to-right sequence.
fn better(dir: Direction, a: &Candidate, b: &Candidate) -> bool {
    match a.score.partial_cmp(&b.score) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => {
            let ord = match dir {
                Direction::Front => a.seq.iter().rev().cmp(b.seq.iter().rev()),
                Direction::Back => a.seq.cmp(&b.seq),
            };
            ord == Ordering::Less
        }
    }
}
