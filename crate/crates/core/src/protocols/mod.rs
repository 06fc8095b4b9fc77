//! Route selection for the three disciplines.
//!
//! Flooding discovery is not packet-simulated: the destination would pick
//! the metric-optimal path among the RREQ copies it receives, so each
//! selector computes that optimum directly over the current snapshot. The
//! engine charges the flood's energy and latency separately.

mod least_cost;
mod widest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mobility::NodeState;
use crate::topology::TopologySnapshot;
use crate::{Error, Extended, NodeId, Result};

pub use least_cost::least_cost_path;
pub use widest::{widest_path, WeightOn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Flow-Oriented Routing: maximize the route expiration time.
    Forp,
    /// Load-Balancing Routing: minimize activity plus traffic interference.
    Lbr,
    /// Min-Max Battery Cost Routing: maximize the weakest intermediate battery.
    Mmbcr,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Forp, Protocol::Lbr, Protocol::Mmbcr];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Forp => "FORP",
            Protocol::Lbr => "LBR",
            Protocol::Mmbcr => "MMBCR",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forp" => Ok(Protocol::Forp),
            "lbr" => Ok(Protocol::Lbr),
            "mmbcr" => Ok(Protocol::Mmbcr),
            other => Err(Error::Config(format!("unknown protocol {other:?}"))),
        }
    }
}

/// A selected path and its protocol-specific score: route expiration time
/// in seconds (FORP), summed load cost (LBR) or bottleneck battery in
/// Joules (MMBCR).
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub nodes: Vec<NodeId>,
    pub metric: Extended,
}

impl Selection {
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn intermediates(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}

/// One installed source-destination route.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub session: usize,
    pub nodes: Vec<NodeId>,
    pub protocol: Protocol,
    pub metric_value: Extended,
    pub discovered_at: f64,
    /// Time at which the route became usable after the discovery round trip.
    pub ready_at: f64,
    pub torn_down_at: Option<f64>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn intermediates(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    /// Lifetime up to teardown, or up to `end` while still open.
    pub fn lifetime(&self, end: f64) -> f64 {
        self.torn_down_at.unwrap_or(end) - self.discovered_at
    }

    /// Every consecutive pair linked and every node alive in `snapshot`.
    pub fn is_valid_in(&self, snapshot: &TopologySnapshot) -> bool {
        self.nodes.iter().all(|&n| snapshot.is_alive(n))
            && self
                .nodes
                .windows(2)
                .all(|w| snapshot.link(w[0], w[1]).is_some())
    }
}

fn check_endpoints(snapshot: &TopologySnapshot, source: NodeId, destination: NodeId) -> Result<()> {
    for node in [source, destination] {
        if node >= snapshot.node_count() {
            return Err(Error::UnknownNode(node));
        }
        if !snapshot.is_alive(node) {
            return Err(Error::DeadNode(node));
        }
    }
    if source == destination {
        return Err(Error::SameEndpoints(source));
    }
    Ok(())
}

/// Path with the largest route expiration time (minimum link LET).
pub fn select_forp(
    snapshot: &TopologySnapshot,
    source: NodeId,
    destination: NodeId,
) -> Result<Option<Selection>> {
    check_endpoints(snapshot, source, destination)?;
    let expiry = |u: NodeId, v: NodeId| {
        snapshot
            .link(u, v)
            .map(|l| l.expiry)
            .expect("neighbors are linked")
    };
    Ok(widest_path(snapshot, source, destination, WeightOn::Links(&expiry)))
}

/// Load cost of `node` as an intermediate forwarder: its own activity plus
/// the activity of all its neighbors.
pub fn lbr_node_cost(snapshot: &TopologySnapshot, states: &[NodeState], node: NodeId) -> Result<u64> {
    Ok(u64::from(states[node].activity) + snapshot.traffic_interference(states, node)?)
}

/// Path with the least summed load cost over intermediate nodes.
pub fn select_lbr(
    snapshot: &TopologySnapshot,
    states: &[NodeState],
    source: NodeId,
    destination: NodeId,
) -> Result<Option<Selection>> {
    check_endpoints(snapshot, source, destination)?;
    let costs: Vec<u64> = (0..snapshot.node_count())
        .map(|n| {
            if snapshot.is_alive(n) {
                lbr_node_cost(snapshot, states, n)
            } else {
                Ok(0)
            }
        })
        .collect::<Result<_>>()?;
    Ok(
        least_cost_path(snapshot, source, destination, |v| costs[v]).map(|(nodes, cost)| {
            Selection {
                nodes,
                metric: Extended::Finite(cost as f64),
            }
        }),
    )
}

/// Path whose weakest intermediate battery is largest. Endpoint batteries
/// are ignored, so a direct link is infinitely wide.
pub fn select_mmbcr(
    snapshot: &TopologySnapshot,
    states: &[NodeState],
    source: NodeId,
    destination: NodeId,
) -> Result<Option<Selection>> {
    check_endpoints(snapshot, source, destination)?;
    let battery = |n: NodeId| Extended::Finite(states[n].battery.joules());
    Ok(widest_path(
        snapshot,
        source,
        destination,
        WeightOn::IntermediateNodes(&battery),
    ))
}

pub fn select(
    protocol: Protocol,
    snapshot: &TopologySnapshot,
    states: &[NodeState],
    source: NodeId,
    destination: NodeId,
) -> Result<Option<Selection>> {
    match protocol {
        Protocol::Forp => select_forp(snapshot, source, destination),
        Protocol::Lbr => select_lbr(snapshot, states, source, destination),
        Protocol::Mmbcr => select_mmbcr(snapshot, states, source, destination),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Point;
    use crate::Energy;

    fn idle_states(n: usize) -> Vec<NodeState> {
        (0..n)
            .map(|id| NodeState {
                id,
                pos: Point::default(),
                speed: 1.0,
                heading: 0.0,
                waypoint: Point::default(),
                battery: Energy::from_joules(10.0),
                activity: 0,
            })
            .collect()
    }

    fn fin(v: f64) -> Extended {
        Extended::Finite(v)
    }

    #[test]
    fn forp_picks_larger_route_expiration() {
        // 0-1-3 with LETs {10, 40}; 0-2-3 with {25, 30}.
        let snap = TopologySnapshot::from_links(
            4,
            250.0,
            0.0,
            [
                (0, 1, 100.0, fin(10.0)),
                (1, 3, 100.0, fin(40.0)),
                (0, 2, 100.0, fin(25.0)),
                (2, 3, 100.0, fin(30.0)),
            ],
        )
        .unwrap();
        let sel = select_forp(&snap, 0, 3).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 2, 3]);
        assert_eq!(sel.metric, fin(25.0));
    }

    #[test]
    fn forp_single_link() {
        let snap = TopologySnapshot::from_links(2, 250.0, 0.0, [(0, 1, 50.0, fin(7.0))]).unwrap();
        let sel = select_forp(&snap, 0, 1).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 1]);
        assert_eq!(sel.metric, fin(7.0));
    }

    #[test]
    fn lbr_avoids_loaded_intermediate() {
        // s=0, d=4, a=1, b=2, c=3 with activity+interference a=6, b=1, c=2.
        let snap = TopologySnapshot::from_links(
            5,
            250.0,
            0.0,
            [
                (0, 1, 1.0, fin(1.0)),
                (1, 4, 1.0, fin(1.0)),
                (0, 2, 1.0, fin(1.0)),
                (2, 3, 1.0, fin(1.0)),
                (3, 4, 1.0, fin(1.0)),
            ],
        )
        .unwrap();
        // cost(m) = activity(m) + Σ activity(neighbors of m)
        let mut states = idle_states(5);
        states[4].activity = 1;
        states[1].activity = 5;
        states[2].activity = 1;
        // a: 5 + (0 + 1) = 6; b: 1 + (0 + 0) = 1; c: 0 + (1 + 1) = 2.
        assert_eq!(lbr_node_cost(&snap, &states, 1).unwrap(), 6);
        assert_eq!(lbr_node_cost(&snap, &states, 2).unwrap(), 1);
        assert_eq!(lbr_node_cost(&snap, &states, 3).unwrap(), 2);
        let sel = select_lbr(&snap, &states, 0, 4).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 2, 3, 4]);
        assert_eq!(sel.metric, fin(3.0));
    }

    #[test]
    fn lbr_direct_edge_costs_zero() {
        let snap = TopologySnapshot::from_links(
            3,
            250.0,
            0.0,
            [(0, 1, 1.0, fin(1.0)), (1, 2, 1.0, fin(1.0)), (0, 2, 1.0, fin(1.0))],
        )
        .unwrap();
        let mut states = idle_states(3);
        states[0].activity = 3;
        let sel = select_lbr(&snap, &states, 0, 2).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 2]);
        assert_eq!(sel.metric, fin(0.0));
    }

    #[test]
    fn mmbcr_maximizes_weakest_intermediate() {
        // 0-1-2-5 with batteries {3, 5}; 0-3-4-5 with {4, 4}.
        let snap = TopologySnapshot::from_links(
            6,
            250.0,
            0.0,
            [
                (0, 1, 1.0, fin(1.0)),
                (1, 2, 1.0, fin(1.0)),
                (2, 5, 1.0, fin(1.0)),
                (0, 3, 1.0, fin(1.0)),
                (3, 4, 1.0, fin(1.0)),
                (4, 5, 1.0, fin(1.0)),
            ],
        )
        .unwrap();
        let mut states = idle_states(6);
        for (n, j) in [(1, 3.0), (2, 5.0), (3, 4.0), (4, 4.0), (0, 0.5), (5, 0.5)] {
            states[n].battery = Energy::from_joules(j);
        }
        let sel = select_mmbcr(&snap, &states, 0, 5).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 3, 4, 5]);
        assert_eq!(sel.metric, fin(4.0));
    }

    #[test]
    fn mmbcr_prefers_direct_link() {
        let snap = TopologySnapshot::from_links(
            3,
            250.0,
            0.0,
            [(0, 1, 1.0, fin(1.0)), (1, 2, 1.0, fin(1.0)), (0, 2, 1.0, fin(1.0))],
        )
        .unwrap();
        let mut states = idle_states(3);
        states[1].battery = Energy::from_joules(1e6);
        let sel = select_mmbcr(&snap, &states, 0, 2).unwrap().unwrap();
        assert_eq!(sel.nodes, vec![0, 2]);
        assert_eq!(sel.metric, Extended::Infinite);
    }

    #[test]
    fn endpoint_preconditions() {
        let snap = TopologySnapshot::from_links(3, 250.0, 0.0, [(0, 1, 1.0, fin(1.0))]).unwrap();
        let states = idle_states(3);
        assert!(matches!(select_forp(&snap, 1, 1), Err(Error::SameEndpoints(1))));
        assert!(matches!(select_lbr(&snap, &states, 0, 7), Err(Error::UnknownNode(7))));
        assert_eq!(select_mmbcr(&snap, &states, 0, 2).unwrap(), None);
    }

    #[test]
    fn protocol_names_parse() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert!("dsr".parse::<Protocol>().is_err());
    }
}
