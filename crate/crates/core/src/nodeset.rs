//! Dense node sets backed by a single 64-bit word.

use std::cmp::Ordering;
use std::fmt;

/// Largest number of variables a model may have.
pub const MAX_NODES: usize = 64;

/// A set of node indices `0..64` stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        NodeSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | 1u64 << i)
    }

    #[must_use]
    pub fn without(self, i: usize) -> Self {
        NodeSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Smallest element.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest element.
    pub fn last(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Number of elements strictly smaller than `i`.
    pub fn rank(self, i: usize) -> usize {
        (self.0 & ((1u64 << i) - 1)).count_ones() as usize
    }

    /// Elements in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Parent-set preference used to break score ties: fewer elements first,
    /// then the lexicographically smaller ascending element list.
    pub fn tie_cmp(self, other: NodeSet) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| lex_cmp(self, other))
    }
}

/// Lexicographic comparison of the ascending element lists of two sets.
pub fn lex_cmp(a: NodeSet, b: NodeSet) -> Ordering {
    let diff = a.0 ^ b.0;
    if diff == 0 {
        return Ordering::Equal;
    }
    // First position where the lists differ holds `low` in exactly one of them.
    let low = diff & diff.wrapping_neg();
    let above = !(low | (low - 1));
    let a_has = a.0 & low != 0;
    let other = if a_has { b.0 } else { a.0 };
    // The list lacking `low` either continues with a larger element or is a prefix.
    let other_continues = other & above != 0;
    match (a_has, other_continues) {
        (true, true) | (false, false) => Ordering::Less,
        (true, false) | (false, true) => Ordering::Greater,
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}
