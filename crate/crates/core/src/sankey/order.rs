//! Node ordering by median-barycenter sweeps.

use alloc::vec;
use alloc::vec::Vec;

use crate::flow::FlowGraph;

/// Per column, `positions[node]` is the node's rank in `order`.
fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (rank, &node) in order.iter().enumerate() {
        pos[node] = rank;
    }
    pos
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize, w: u64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += w;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over indices `< i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn pair_crossings(edges: &[(usize, usize, u64)], left: &[usize], right: &[usize]) -> u64 {
    let mut placed: Vec<(usize, usize, u64)> = edges
        .iter()
        .map(|&(a, b, w)| (left[a], right[b], w))
        .collect();
    placed.sort_unstable();
    let mut seen = Fenwick::new(right.len());
    let mut seen_total = 0u64;
    let mut crossings = 0u64;
    let mut start = 0;
    while start < placed.len() {
        // Edges sharing a left endpoint never cross each other.
        let mut end = start;
        while end < placed.len() && placed[end].0 == placed[start].0 {
            end += 1;
        }
        for &(_, r, w) in &placed[start..end] {
            let at_or_below = seen.prefix(r + 1);
            crossings += w * (seen_total - at_or_below);
        }
        for &(_, r, w) in &placed[start..end] {
            seen.add(r, w);
            seen_total += w;
        }
        start = end;
    }
    crossings
}

/// Weighted crossings over all column pairs: every unordered pair of
/// class-agnostic links whose endpoints interleave adds the product of
/// their counts.
pub fn crossing_count(flows: &FlowGraph, orders: &[Vec<usize>]) -> u64 {
    let pos: Vec<Vec<usize>> = orders.iter().map(|o| positions(o)).collect();
    flows
        .pairs
        .iter()
        .map(|p| pair_crossings(&p.aggregated(), &pos[p.left], &pos[p.right]))
        .sum()
}

pub fn index_order(flows: &FlowGraph) -> Vec<Vec<usize>> {
    flows
        .plan
        .columns
        .iter()
        .map(|c| (0..c.size()).collect())
        .collect()
}

/// Neighbours of each node of `column` in column `other`, as
/// `(rank in other, weight)`.
fn neighbours(
    flows: &FlowGraph,
    column: usize,
    other: usize,
    other_pos: &[usize],
) -> Vec<Vec<(usize, u64)>> {
    let mut out = vec![Vec::new(); flows.plan.columns[column].size()];
    for pair in &flows.pairs {
        let agg = if pair.left == column && pair.right == other {
            pair.aggregated()
        } else if pair.right == column && pair.left == other {
            pair.aggregated()
                .into_iter()
                .map(|(a, b, w)| (b, a, w))
                .collect()
        } else {
            continue;
        };
        for (node, nb, w) in agg {
            out[node].push((other_pos[nb], w));
        }
    }
    out
}

/// `(weighted lower median, weighted mean)` of neighbour ranks.
fn median_barycenter(nbs: &mut [(usize, u64)]) -> Option<(usize, f64)> {
    let total: u64 = nbs.iter().map(|n| n.1).sum();
    if total == 0 {
        return None;
    }
    nbs.sort_unstable();
    let mut acc = 0;
    let mut median = nbs[0].0;
    for &(r, w) in nbs.iter() {
        acc += w;
        if 2 * acc >= total {
            median = r;
            break;
        }
    }
    let mean = nbs.iter().map(|&(r, w)| r as f64 * w as f64).sum::<f64>() / total as f64;
    Some((median, mean))
}

/// Reorders `column` against the fixed neighbour column. Nodes without
/// neighbours keep their slot; the others fill the remaining slots sorted by
/// median, then barycenter, then node index.
fn reorder(flows: &FlowGraph, orders: &[Vec<usize>], column: usize, other: usize) -> Vec<usize> {
    let other_pos = positions(&orders[other]);
    let mut nbs = neighbours(flows, column, other, &other_pos);
    let current = &orders[column];
    let mut keyed: Vec<(usize, f64, usize)> = Vec::new();
    let mut free_slots = Vec::new();
    for (slot, &node) in current.iter().enumerate() {
        if let Some((m, b)) = median_barycenter(&mut nbs[node]) {
            keyed.push((m, b, node));
            free_slots.push(slot);
        }
    }
    keyed.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut next = current.clone();
    for (slot, (_, _, node)) in free_slots.into_iter().zip(keyed) {
        next[slot] = node;
    }
    next
}

/// Per-column node order from alternating median-barycenter sweeps.
///
/// Each sweep reorders columns left to right against their left neighbour,
/// then right to left against their right neighbour. A reordered column is
/// kept only if total crossings do not increase, so the result never has
/// more crossings than index order.
pub fn order_nodes(flows: &FlowGraph, sweeps: usize) -> Vec<Vec<usize>> {
    let mut orders = index_order(flows);
    let columns = orders.len();
    let mut best = crossing_count(flows, &orders);
    for _ in 0..sweeps {
        if best == 0 {
            break;
        }
        let forward = (1..columns).map(|c| (c, c - 1));
        let backward = (0..columns.saturating_sub(1)).rev().map(|c| (c, c + 1));
        for (column, other) in forward.chain(backward) {
            let candidate = reorder(flows, &orders, column, other);
            if candidate == orders[column] {
                continue;
            }
            let previous = core::mem::replace(&mut orders[column], candidate);
            let crossings = crossing_count(flows, &orders);
            if crossings <= best {
                best = crossings;
            } else {
                orders[column] = previous;
            }
        }
    }
    orders
}
