//! One survivor per node set by recursive binary partition on set
//! membership, highest node first. Survivors come out in increasing order
//! of their bit masks.

use crate::nodeset::NodeSet;

pub(crate) fn dedupe<T>(
    items: Vec<T>,
    comp: NodeSet,
    set_of: impl Fn(&T) -> NodeSet,
    better: impl Fn(&T, &T) -> bool,
) -> Vec<T> {
    let mut nodes = comp.to_vec();
    nodes.reverse();
    let sets: Vec<NodeSet> = items.iter().map(&set_of).collect();
    let mut winners = Vec::new();
    partition(
        (0..items.len()).collect(),
        0,
        &nodes,
        &sets,
        &mut |group: &[usize]| {
            let mut best = group[0];
            for &i in &group[1..] {
                if better(&items[i], &items[best]) {
                    best = i;
                }
            }
            winners.push(best);
        },
    );
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    winners
        .into_iter()
        .map(|i| slots[i].take().expect("each index wins once"))
        .collect()
}

fn partition(
    idx: Vec<usize>,
    level: usize,
    nodes: &[usize],
    sets: &[NodeSet],
    emit: &mut impl FnMut(&[usize]),
) {
    if idx.is_empty() {
        return;
    }
    if idx.len() == 1 || level == nodes.len() {
        emit(&idx);
        return;
    }
    let v = nodes[level];
    let (ones, zeros): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| sets[i].contains(v));
    partition(zeros, level + 1, nodes, sets, emit);
    partition(ones, level + 1, nodes, sets, emit);
}
