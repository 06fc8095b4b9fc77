//! Statistical stand-in for 802.11 DCF queuing and contention.
//!
//! Each hop costs the airtime of DATA+RTS+CTS+ACK inflated by `1 + κ·C`,
//! where `C` counts the other active transmitters near the hop: within the
//! transmission range when every transmission is at full power, within the
//! hop length when power control shrinks the area a handshake silences.

use crate::energy::PowerModel;
use crate::mobility::NodeState;
use crate::topology::TopologySnapshot;
use crate::NodeId;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DelayBreakdown {
    /// Waiting for route acquisition.
    pub buffering: f64,
    /// Medium access plus transmission, summed over hops.
    pub queuing_transmission: f64,
    pub propagation: f64,
}

impl DelayBreakdown {
    pub fn service(&self) -> f64 {
        self.queuing_transmission + self.propagation
    }

    pub fn total(&self) -> f64 {
        self.buffering + self.service()
    }
}

/// Active transmitters other than the hop's endpoints within the
/// contention radius of either endpoint.
pub fn contention(
    states: &[NodeState],
    active: &[bool],
    sender: NodeId,
    receiver: NodeId,
    radius: f64,
) -> usize {
    let (a, b) = (states[sender].pos, states[receiver].pos);
    states
        .iter()
        .filter(|n| {
            active[n.id]
                && n.id != sender
                && n.id != receiver
                && n.is_alive()
                && (n.pos.distance(a) <= radius || n.pos.distance(b) <= radius)
        })
        .count()
}

/// End-to-end delay of one data packet over `route` (a live path in
/// `snapshot`), after waiting `discovery_wait` seconds for the route.
pub fn packet_delay(
    route: &[NodeId],
    snapshot: &TopologySnapshot,
    states: &[NodeState],
    active: &[bool],
    discovery_wait: f64,
    model: &PowerModel,
    kappa: f64,
) -> DelayBreakdown {
    let exchange = model
        .airtime(model.sizes.data_exchange())
        .expect("data exchange is non-empty");
    let mut delay = DelayBreakdown {
        buffering: discovery_wait,
        ..DelayBreakdown::default()
    };
    for hop in route.windows(2) {
        let distance = snapshot
            .link(hop[0], hop[1])
            .expect("route hop is a live link")
            .distance;
        let radius = if model.tpc { distance } else { model.range };
        let c = contention(states, active, hop[0], hop[1], radius);
        delay.queuing_transmission += exchange * (1.0 + kappa * c as f64);
        delay.propagation += distance / SPEED_OF_LIGHT;
    }
    delay
}

/// Route acquisition latency: the request travels out and the reply comes
/// back over `hops` hops, each costing an RREQ airtime plus forwarding
/// overhead.
pub fn discovery_latency(hops: usize, model: &PowerModel, forwarding_overhead: f64) -> f64 {
    let rreq = model
        .airtime(model.sizes.rreq_base)
        .expect("rreq size is positive");
    2.0 * hops as f64 * (rreq + forwarding_overhead)
}
