//! Instantaneous unit-disk graph over the live nodes.

use std::collections::VecDeque;

use crate::mobility::{link_expiration_time, NodeState};
use crate::{Error, Extended, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub neighbor: NodeId,
    /// meters
    pub distance: f64,
    /// Predicted link expiration time in seconds.
    pub expiry: Extended,
}

/// Neighbor enumeration shared by the path search kernels.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_;
}

impl Adjacency for [Vec<NodeId>] {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self[node].iter().copied()
    }
}

impl Adjacency for Vec<Vec<NodeId>> {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self[node].iter().copied()
    }
}

/// Links are symmetric, carry identical distance and expiry in both
/// directions, and every listed distance is within range. Neighbor lists are
/// sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySnapshot {
    pub time: f64,
    pub range: f64,
    adjacency: Vec<Vec<Link>>,
    alive: Vec<bool>,
}

impl TopologySnapshot {
    /// Links every pair of live nodes within `range` (inclusive). Nodes with
    /// an exhausted battery are left out entirely.
    pub fn build(states: &[NodeState], range: f64, time: f64) -> Self {
        let n = states.len();
        let mut adjacency = vec![Vec::new(); n];
        let alive: Vec<bool> = states.iter().map(NodeState::is_alive).collect();
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !alive[j] {
                    continue;
                }
                let distance = states[i].distance(&states[j]);
                if distance <= range {
                    let expiry = link_expiration_time(&states[i], &states[j], range)
                        .expect("in-range pair");
                    adjacency[i].push(Link {
                        neighbor: j,
                        distance,
                        expiry,
                    });
                    adjacency[j].push(Link {
                        neighbor: i,
                        distance,
                        expiry,
                    });
                }
            }
        }
        // i-loop pushes into j's list in increasing i, and into i's list in
        // increasing j, so both are already sorted.
        TopologySnapshot {
            time,
            range,
            adjacency,
            alive,
        }
    }

    /// Builds a snapshot from an explicit undirected edge list
    /// `(i, j, distance, expiry)`. All nodes are considered alive.
    pub fn from_links(
        node_count: usize,
        range: f64,
        time: f64,
        links: impl IntoIterator<Item = (NodeId, NodeId, f64, Extended)>,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        for (i, j, distance, expiry) in links {
            if i >= node_count {
                return Err(Error::UnknownNode(i));
            }
            if j >= node_count {
                return Err(Error::UnknownNode(j));
            }
            if i == j || !(0.0..=range).contains(&distance) {
                return Err(Error::DistanceOutOfRange(distance, range));
            }
            adjacency[i].push(Link {
                neighbor: j,
                distance,
                expiry,
            });
            adjacency[j].push(Link {
                neighbor: i,
                distance,
                expiry,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|l| l.neighbor);
            list.dedup_by_key(|l| l.neighbor);
        }
        Ok(TopologySnapshot {
            time,
            range,
            adjacency,
            alive: vec![true; node_count],
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_alive(&self, node: NodeId) -> bool {
        self.alive.get(node).copied().unwrap_or(false)
    }

    pub fn links(&self, node: NodeId) -> &[Link] {
        &self.adjacency[node]
    }

    pub fn link(&self, a: NodeId, b: NodeId) -> Option<&Link> {
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |l| l.neighbor)
            .ok()
            .map(|idx| &list[idx])
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Mean degree over live nodes.
    pub fn mean_degree(&self) -> f64 {
        let live = self.alive.iter().filter(|a| **a).count();
        if live == 0 {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / live as f64
    }

    /// Σ activity over the neighbors of `node`.
    pub fn traffic_interference(&self, states: &[NodeState], node: NodeId) -> Result<u64> {
        let links = self.adjacency.get(node).ok_or(Error::UnknownNode(node))?;
        if !self.is_alive(node) {
            return Err(Error::DeadNode(node));
        }
        Ok(links
            .iter()
            .map(|l| u64::from(states[l.neighbor].activity))
            .sum())
    }

    /// Hop distance from `source` to every node reachable from it, in BFS
    /// visiting order (neighbors in increasing id).
    pub fn bfs_hops(&self, source: NodeId) -> Vec<(NodeId, u32)> {
        let mut hops = vec![u32::MAX; self.node_count()];
        let mut order = Vec::new();
        if !self.is_alive(source) {
            return order;
        }
        let mut queue = VecDeque::from([source]);
        hops[source] = 0;
        while let Some(u) = queue.pop_front() {
            order.push((u, hops[u]));
            for l in &self.adjacency[u] {
                if hops[l.neighbor] == u32::MAX {
                    hops[l.neighbor] = hops[u] + 1;
                    queue.push_back(l.neighbor);
                }
            }
        }
        order
    }

    /// `(i, j, distance, expiry)` with `i < j`, in increasing `(i, j)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64, Extended)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |l| l.neighbor > i)
                .map(move |l| (i, l.neighbor, l.distance, l.expiry))
        })
    }
}

impl Adjacency for TopologySnapshot {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node].iter().map(|l| l.neighbor)
    }
}
