//! Tables over "preselected set plus one outside parent" search spaces.

use super::{prefer, NodeSpace, DISALLOWED};
use crate::error::Result;
use crate::nodeset::NodeSet;

#[derive(Debug, Clone)]
pub(super) struct DenseTable {
    pre: Vec<usize>,
    pre_mask: NodeSet,
    plus1: bool,
    outside_mask: NodeSet,
    /// Position of each outside node in the plus-one tables, `u32::MAX` if none.
    outside_pos: Vec<u32>,
    /// Global parent set of each local subset index.
    sets: Vec<NodeSet>,
    base: Vec<f64>,
    cum_base: Vec<f64>,
    cum_base_arg: Vec<NodeSet>,
    // plus-one tables, `2^K` entries per outside node
    extra: Vec<f64>,
    cum_extra: Vec<f64>,
    cum_extra_arg: Vec<NodeSet>,
}

/// In-place subset-lattice sweep turning `vals` into cumulative maxima.
fn sweep(k: usize, vals: &mut [f64], args: &mut [NodeSet]) {
    for bit in 0..k {
        let b = 1usize << bit;
        for idx in 0..vals.len() {
            if idx & b != 0 {
                let j = idx ^ b;
                if prefer(vals[j], args[j], vals[idx], args[idx]) {
                    vals[idx] = vals[j];
                    args[idx] = args[j];
                }
            }
        }
    }
}

impl DenseTable {
    pub(super) fn build(
        node: usize,
        p: usize,
        preselected: NodeSet,
        plus1: bool,
        mut score: impl FnMut(NodeSet) -> Result<f64>,
    ) -> Result<Self> {
        let pre = preselected.to_vec();
        let k = pre.len();
        let size = 1usize << k;
        let sets: Vec<NodeSet> = (0..size)
            .map(|idx| {
                pre.iter()
                    .enumerate()
                    .filter(|(b, _)| idx >> b & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let outside_mask = if plus1 {
            NodeSet::full(p).difference(preselected).without(node)
        } else {
            NodeSet::EMPTY
        };
        let mut outside_pos = vec![u32::MAX; p];
        for (pos, h) in outside_mask.iter().enumerate() {
            outside_pos[h] = pos as u32;
        }

        let base = sets.iter().map(|&s| score(s)).collect::<Result<Vec<_>>>()?;
        let mut cum_base = base.clone();
        let mut cum_base_arg = sets.clone();
        sweep(k, &mut cum_base, &mut cum_base_arg);

        let mut extra = Vec::with_capacity(outside_mask.len() * size);
        let mut cum_extra_arg = Vec::with_capacity(outside_mask.len() * size);
        for h in outside_mask {
            for &s in &sets {
                extra.push(score(s.with(h))?);
                cum_extra_arg.push(s.with(h));
            }
        }
        let mut cum_extra = extra.clone();
        if size > 0 {
            for (vals, args) in cum_extra
                .chunks_mut(size)
                .zip(cum_extra_arg.chunks_mut(size))
            {
                sweep(k, vals, args);
            }
        }

        Ok(DenseTable {
            pre,
            pre_mask: preselected,
            plus1,
            outside_mask,
            outside_pos,
            sets,
            base,
            cum_base,
            cum_base_arg,
            extra,
            cum_extra,
            cum_extra_arg,
        })
    }

    fn local_index(&self, set: NodeSet) -> usize {
        self.pre
            .iter()
            .enumerate()
            .filter(|(_, &v)| set.contains(v))
            .fold(0, |acc, (b, _)| acc | 1 << b)
    }

    fn size(&self) -> usize {
        self.sets.len()
    }

    pub(super) fn local_score(&self, parents: NodeSet) -> f64 {
        let idx = self.local_index(parents);
        let rest = parents.difference(self.pre_mask);
        match rest.len() {
            0 => self.base[idx],
            1 if self.outside_mask.contains(rest.first().unwrap()) => {
                let pos = self.outside_pos[rest.first().unwrap()] as usize;
                self.extra[pos * self.size() + idx]
            }
            _ => DISALLOWED,
        }
    }

    pub(super) fn best_score(&self, potential: NodeSet) -> f64 {
        let idx = self.local_index(potential);
        let mut best = self.cum_base[idx];
        for h in potential.intersection(self.outside_mask) {
            let v = self.cum_extra[self.outside_pos[h] as usize * self.size() + idx];
            if v > best {
                best = v;
            }
        }
        best
    }

    pub(super) fn best(&self, potential: NodeSet) -> (f64, NodeSet) {
        let idx = self.local_index(potential);
        let mut best = (self.cum_base[idx], self.cum_base_arg[idx]);
        for h in potential.intersection(self.outside_mask) {
            let at = self.outside_pos[h] as usize * self.size() + idx;
            let cand = (self.cum_extra[at], self.cum_extra_arg[at]);
            if prefer(cand.0, cand.1, best.0, best.1) {
                best = cand;
            }
        }
        best
    }

    pub(super) fn for_each(&self, f: &mut impl FnMut(NodeSet, f64)) {
        for (&s, &x) in self.sets.iter().zip(&self.base) {
            if x.is_finite() {
                f(s, x);
            }
        }
        for (pos, h) in self.outside_mask.iter().enumerate() {
            let row = &self.extra[pos * self.size()..(pos + 1) * self.size()];
            for (&s, &x) in self.sets.iter().zip(row) {
                if x.is_finite() {
                    f(s.with(h), x);
                }
            }
        }
    }

    pub(super) fn candidate_parents(&self) -> NodeSet {
        self.pre_mask.union(self.outside_mask)
    }

    pub(super) fn space(&self) -> NodeSpace {
        NodeSpace {
            preselected: self.pre_mask,
            plus1: self.plus1,
        }
    }
}
