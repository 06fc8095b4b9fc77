use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::topology::Adjacency;
use crate::NodeId;

/// Path minimizing the summed cost of its intermediate nodes; ties go to
/// fewer hops, then to the lexicographically smallest node sequence.
/// Returns the path and its cost.
///
/// Each link `u -> v` is charged the cost of `v` unless `v` is the
/// destination. A reverse Dijkstra from the destination over
/// `(cost, hops)` keys yields the optimal continuation from every node, and
/// the path is then walked greedily from the source taking the smallest id
/// among optimal next hops.
pub fn least_cost_path<G: Adjacency + ?Sized>(
    graph: &G,
    source: NodeId,
    destination: NodeId,
    node_cost: impl Fn(NodeId) -> u64,
) -> Option<(Vec<NodeId>, u64)> {
    let n = graph.node_count();
    if source >= n || destination >= n || source == destination {
        return None;
    }
    let step_cost = |v: NodeId| if v == destination { 0 } else { node_cost(v) };

    let mut to_dest: Vec<Option<(u64, u32)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    to_dest[destination] = Some((0, 0));
    heap.push(Reverse(((0u64, 0u32), destination)));
    while let Some(Reverse((key, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v == source {
            break;
        }
        let via = (key.0 + step_cost(v), key.1 + 1);
        for u in graph.neighbors(v) {
            if !done[u] && to_dest[u].is_none_or(|k| via < k) {
                to_dest[u] = Some(via);
                heap.push(Reverse((via, u)));
            }
        }
    }
    let (cost, _) = to_dest[source]?;

    // Only settled nodes carry exact keys; every optimal continuation from
    // the source settles before the source does.
    let mut nodes = vec![source];
    let mut u = source;
    while u != destination {
        let here = to_dest[u].expect("on an optimal path");
        u = graph
            .neighbors(u)
            .filter(|&v| {
                done[v]
                    && to_dest[v]
                        .is_some_and(|(c, h)| (c + step_cost(v), h + 1) == here)
            })
            .min()
            .expect("an optimal continuation exists");
        nodes.push(u);
    }
    Some((nodes, cost))
}
