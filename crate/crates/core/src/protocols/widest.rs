use std::collections::{BinaryHeap, VecDeque};

use crate::topology::Adjacency;
use crate::{Extended, NodeId};

use super::Selection;

/// Where the bottleneck weights of a widest-path search live.
pub enum WeightOn<'a> {
    /// Weight of the (directed) link `u -> v`.
    Links(&'a dyn Fn(NodeId, NodeId) -> Extended),
    /// Weight of a node; only intermediate nodes count, so the endpoints of
    /// the path are treated as infinitely wide.
    IntermediateNodes(&'a dyn Fn(NodeId) -> Extended),
}

/// Path from `source` to `destination` that maximizes the minimum weight
/// along it. Among equally wide paths the one with fewer hops wins, then
/// the lexicographically smallest node sequence.
///
/// Runs a best-first bottleneck search for the optimal width, then a
/// breadth-first search restricted to links at least that wide.
pub fn widest_path<G: Adjacency + ?Sized>(
    graph: &G,
    source: NodeId,
    destination: NodeId,
    weight: WeightOn<'_>,
) -> Option<Selection> {
    let n = graph.node_count();
    if source >= n || destination >= n || source == destination {
        return None;
    }
    let link_weight = |u: NodeId, v: NodeId| -> Extended {
        match &weight {
            WeightOn::Links(w) => w(u, v),
            WeightOn::IntermediateNodes(w) => {
                if v == destination || v == source {
                    Extended::Infinite
                } else {
                    w(v)
                }
            }
        }
    };

    let mut best: Vec<Option<Extended>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some(Extended::Infinite);
    heap.push((Extended::Infinite, std::cmp::Reverse(source)));
    while let Some((width, std::cmp::Reverse(u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == destination {
            break;
        }
        for v in graph.neighbors(u) {
            if done[v] {
                continue;
            }
            let cand = width.min(link_weight(u, v));
            if best[v].is_none_or(|b| cand > b) {
                best[v] = Some(cand);
                heap.push((cand, std::cmp::Reverse(v)));
            }
        }
    }
    let width = best[destination]?;

    // Hop distance to the destination over links no narrower than `width`.
    let mut hops = vec![u32::MAX; n];
    hops[destination] = 0;
    let mut queue = VecDeque::from([destination]);
    while let Some(v) = queue.pop_front() {
        for u in graph.neighbors(v) {
            if hops[u] == u32::MAX && link_weight(u, v) >= width {
                hops[u] = hops[v] + 1;
                queue.push_back(u);
            }
        }
    }
    debug_assert_ne!(hops[source], u32::MAX);

    let mut nodes = vec![source];
    let mut u = source;
    while u != destination {
        u = graph
            .neighbors(u)
            .filter(|&v| hops[v] != u32::MAX && hops[v] + 1 == hops[u] && link_weight(u, v) >= width)
            .min()
            .expect("a shortest wide path continues from every node on it");
        nodes.push(u);
    }
    Some(Selection {
        nodes,
        metric: width,
    })
}
