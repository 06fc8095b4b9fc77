//! Radio energy model and per-node energy ledger.
//!
//! Only transmission and reception are charged; idle listening and
//! overhearing of unicast traffic are free. Energy of a packet is
//! `power * airtime`, with per-hop transmit power either fixed or, under
//! transmission power control, `circuit + coeff * d^4`.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::mobility::NodeState;
use crate::topology::TopologySnapshot;
use crate::{Energy, Error, NodeId, Result};

/// Packet sizes in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSizes {
    pub data: u32,
    pub rts: u32,
    pub cts: u32,
    pub ack: u32,
    pub beacon: u32,
    /// RREQ header without any recorded hops.
    pub rreq_base: u32,
    pub rreq_per_hop: u32,
    pub rrep: u32,
}

impl Default for PacketSizes {
    fn default() -> Self {
        PacketSizes {
            data: 512,
            rts: 20,
            cts: 14,
            ack: 14,
            beacon: 32,
            rreq_base: 64,
            rreq_per_hop: 8,
            rrep: 64,
        }
    }
}

impl PacketSizes {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.data,
            self.rts,
            self.cts,
            self.ack,
            self.beacon,
            self.rreq_base,
            self.rrep,
        ];
        if all.contains(&0) {
            return Err(Error::Config(format!("packet sizes must be positive: {self:?}")));
        }
        Ok(())
    }

    /// DATA plus its RTS/CTS/ACK exchange.
    pub fn data_exchange(&self) -> u32 {
        self.data + self.rts + self.cts + self.ack
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub tpc: bool,
    /// Watts, used per hop without power control and for broadcasts.
    pub fixed_tx_power: f64,
    pub rx_power: f64,
    pub circuit_power: f64,
    /// W/m^4
    pub distance_coeff: f64,
    pub range: f64,
    /// bits per second
    pub bitrate: f64,
    pub sizes: PacketSizes,
}

impl PowerModel {
    pub const FIXED_TX_POWER: f64 = 1.4;
    pub const RX_POWER: f64 = 0.967;
    pub const CIRCUIT_POWER: f64 = 1.1182;
    pub const DISTANCE_COEFF: f64 = 7.2e-11;

    pub fn new(tpc: bool, range: f64, bitrate: f64, sizes: PacketSizes) -> Self {
        PowerModel {
            tpc,
            fixed_tx_power: Self::FIXED_TX_POWER,
            rx_power: Self::RX_POWER,
            circuit_power: Self::CIRCUIT_POWER,
            distance_coeff: Self::DISTANCE_COEFF,
            range,
            bitrate,
            sizes,
        }
    }

    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self::new(config.tpc, config.range, config.bitrate, config.packet_sizes)
    }

    /// Transmit power for a hop of `d` meters.
    pub fn tx_power(&self, d: f64) -> Result<f64> {
        if !(0.0..=self.range).contains(&d) {
            return Err(Error::DistanceOutOfRange(d, self.range));
        }
        Ok(if self.tpc {
            self.circuit_power + self.distance_coeff * d.powi(4)
        } else {
            self.fixed_tx_power
        })
    }

    /// Broadcasts address every neighbor, so they go out at full-range power.
    pub fn broadcast_tx_power(&self) -> f64 {
        if self.tpc {
            self.circuit_power + self.distance_coeff * self.range.powi(4)
        } else {
            self.fixed_tx_power
        }
    }

    pub fn airtime(&self, bytes: u32) -> Result<f64> {
        if bytes == 0 {
            return Err(Error::EmptyPacket);
        }
        Ok(8.0 * f64::from(bytes) / self.bitrate)
    }

    pub fn rreq_bytes(&self, recorded_hops: u32) -> u32 {
        self.sizes.rreq_base + self.sizes.rreq_per_hop * recorded_hops
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    DataTx,
    DataRx,
    /// RTS/CTS/ACK around data packets.
    Mac,
    Beacon,
    /// RREQ floods and RREP replies, including the RREP's control frames.
    Discovery,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::DataTx,
        Category::DataRx,
        Category::Mac,
        Category::Beacon,
        Category::Discovery,
    ];

    /// Lowercase identifier, as used in the ledger CSV columns.
    pub fn name(self) -> &'static str {
        match self {
            Category::DataTx => "data_tx",
            Category::DataRx => "data_rx",
            Category::Mac => "mac",
            Category::Beacon => "beacon",
            Category::Discovery => "discovery",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// What a unicast hop carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    Data,
    RouteReply,
}

/// Cumulative energy consumed per node and category. Every debit also
/// lowers the node's battery by exactly the booked amount, so
/// `initial - battery == total` holds at all times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    initial: Energy,
    consumed: Vec<[Energy; 5]>,
    exhausted: Vec<NodeId>,
}

impl EnergyLedger {
    pub fn new(node_count: usize, initial: Energy) -> Self {
        EnergyLedger {
            initial,
            consumed: vec![[Energy::ZERO; 5]; node_count],
            exhausted: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.consumed.len()
    }

    pub fn initial(&self) -> Energy {
        self.initial
    }

    pub fn consumed(&self, node: NodeId, category: Category) -> Energy {
        self.consumed[node][category.index()]
    }

    pub fn total(&self, node: NodeId) -> Energy {
        self.consumed[node].iter().copied().sum()
    }

    pub fn category_total(&self, category: Category) -> Energy {
        self.consumed.iter().map(|c| c[category.index()]).sum()
    }

    pub fn grand_total(&self) -> Energy {
        (0..self.node_count()).map(|n| self.total(n)).sum()
    }

    /// Nodes whose battery hit zero since the last call, in order.
    pub fn take_exhausted(&mut self) -> Vec<NodeId> {
        std::mem::take(&mut self.exhausted)
    }

    /// Debits `joules` from `node`, clamped to its residual charge. Dead
    /// nodes are never charged. Returns the amount actually booked.
    pub fn debit(
        &mut self,
        states: &mut [NodeState],
        node: NodeId,
        category: Category,
        joules: f64,
    ) -> Energy {
        let battery = &mut states[node].battery;
        if battery.is_zero() {
            return Energy::ZERO;
        }
        let amount = Energy::from_joules(joules).min(*battery);
        *battery -= amount;
        self.consumed[node][category.index()] += amount;
        if battery.is_zero() {
            self.exhausted.push(node);
        }
        amount
    }
}

/// One unicast hop with its RTS/CTS/ACK handshake. The sender transmits
/// RTS and the payload and receives CTS and ACK; the receiver does the
/// reverse. Transmissions use the hop's transmit power.
#[allow(clippy::too_many_arguments)]
pub fn charge_unicast_hop(
    ledger: &mut EnergyLedger,
    states: &mut [NodeState],
    sender: NodeId,
    receiver: NodeId,
    distance: f64,
    bytes: u32,
    payload: Payload,
    model: &PowerModel,
) -> Result<()> {
    for node in [sender, receiver] {
        if !states[node].is_alive() {
            return Err(Error::DeadNode(node));
        }
    }
    let tx = model.tx_power(distance)?;
    let rx = model.rx_power;
    let sizes = &model.sizes;
    let (payload_tx, payload_rx, control) = match payload {
        Payload::Data => (Category::DataTx, Category::DataRx, Category::Mac),
        Payload::RouteReply => (Category::Discovery, Category::Discovery, Category::Discovery),
    };
    let rts = model.airtime(sizes.rts)?;
    let cts = model.airtime(sizes.cts)?;
    let ack = model.airtime(sizes.ack)?;
    let body = model.airtime(bytes)?;

    ledger.debit(states, sender, control, tx * rts);
    ledger.debit(states, receiver, control, rx * rts);
    ledger.debit(states, receiver, control, tx * cts);
    ledger.debit(states, sender, control, rx * cts);
    ledger.debit(states, sender, payload_tx, tx * body);
    ledger.debit(states, receiver, payload_rx, rx * body);
    ledger.debit(states, receiver, control, tx * ack);
    ledger.debit(states, sender, control, rx * ack);
    Ok(())
}

/// One broadcast without handshake: the sender transmits at full-range
/// power and every live neighbor receives.
pub fn charge_broadcast(
    ledger: &mut EnergyLedger,
    states: &mut [NodeState],
    sender: NodeId,
    neighbors: impl IntoIterator<Item = NodeId>,
    bytes: u32,
    category: Category,
    model: &PowerModel,
) -> Result<()> {
    if !states[sender].is_alive() {
        return Err(Error::DeadNode(sender));
    }
    let airtime = model.airtime(bytes)?;
    ledger.debit(states, sender, category, model.broadcast_tx_power() * airtime);
    let rx = model.rx_power * airtime;
    for n in neighbors {
        if states[n].is_alive() {
            ledger.debit(states, n, category, rx);
        }
    }
    Ok(())
}

/// Charges one route discovery from `source`: every node the RREQ reaches
/// rebroadcasts it once, carrying the hops recorded so far, and the RREP
/// travels back along `route` when one was found.
pub fn charge_route_discovery(
    ledger: &mut EnergyLedger,
    states: &mut [NodeState],
    snapshot: &TopologySnapshot,
    source: NodeId,
    route: Option<&[NodeId]>,
    model: &PowerModel,
) -> Result<()> {
    for (node, hops) in snapshot.bfs_hops(source) {
        if !states[node].is_alive() {
            continue;
        }
        let neighbors = snapshot.links(node).iter().map(|l| l.neighbor);
        charge_broadcast(
            ledger,
            states,
            node,
            neighbors,
            model.rreq_bytes(hops),
            Category::Discovery,
            model,
        )?;
    }
    let Some(route) = route else {
        return Ok(());
    };
    for pair in route.windows(2).rev() {
        let (prev, next) = (pair[0], pair[1]);
        if !states[prev].is_alive() || !states[next].is_alive() {
            break;
        }
        let link = snapshot
            .link(next, prev)
            .ok_or(Error::NotNeighbors(next, prev, f64::NAN, snapshot.range))?;
        charge_unicast_hop(
            ledger,
            states,
            next,
            prev,
            link.distance,
            model.sizes.rrep,
            Payload::RouteReply,
            model,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Point;
    use approx::assert_abs_diff_eq;

    fn model(tpc: bool) -> PowerModel {
        PowerModel::new(tpc, 250.0, 2e6, PacketSizes::default())
    }

    fn nodes(positions: &[(f64, f64)], joules: f64) -> Vec<NodeState> {
        positions
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| NodeState {
                id,
                pos: Point::new(x, y),
                speed: 1.0,
                heading: 0.0,
                waypoint: Point::new(x, y),
                battery: Energy::from_joules(joules),
                activity: 0,
            })
            .collect()
    }

    #[test]
    fn tx_power_values() {
        assert_abs_diff_eq!(model(true).tx_power(0.0).unwrap(), 1.1182, epsilon = 1e-15);
        assert_abs_diff_eq!(model(true).tx_power(250.0).unwrap(), 1.39945, epsilon = 1e-6);
        assert_eq!(model(false).tx_power(100.0).unwrap(), 1.4);
        assert!(matches!(
            model(true).tx_power(250.5),
            Err(Error::DistanceOutOfRange(..))
        ));
        let m = model(true);
        let mut last = 0.0;
        for d in 0..=250 {
            let p = m.tx_power(d as f64).unwrap();
            assert!(p >= last && p <= 1.4);
            last = p;
        }
    }

    #[test]
    fn airtime_values() {
        let m = model(false);
        assert_abs_diff_eq!(m.airtime(512).unwrap(), 2.048e-3, epsilon = 1e-15);
        assert_eq!(m.airtime(1024).unwrap(), 2.0 * m.airtime(512).unwrap());
        assert!(matches!(m.airtime(0), Err(Error::EmptyPacket)));
    }

    #[test]
    fn unicast_hop_books_every_frame() {
        for (tpc, tx) in [(false, 1.4), (true, 1.1182 + 7.2e-11 * 250f64.powi(4))] {
            let m = model(tpc);
            let mut states = nodes(&[(0.0, 0.0), (250.0, 0.0)], 10.0);
            let mut ledger = EnergyLedger::new(2, Energy::from_joules(10.0));
            charge_unicast_hop(&mut ledger, &mut states, 0, 1, 250.0, 512, Payload::Data, &m).unwrap();
            let air = |b: f64| 8.0 * b / 2e6;
            assert_abs_diff_eq!(ledger.consumed(0, Category::DataTx).joules(), tx * air(512.0), epsilon = 1e-12);
            assert_abs_diff_eq!(ledger.consumed(1, Category::DataRx).joules(), 0.967 * air(512.0), epsilon = 1e-12);
            assert_abs_diff_eq!(
                ledger.consumed(0, Category::Mac).joules(),
                tx * air(20.0) + 0.967 * air(28.0),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                ledger.consumed(1, Category::Mac).joules(),
                tx * air(28.0) + 0.967 * air(20.0),
                epsilon = 1e-12
            );
            for n in 0..2 {
                assert_eq!(
                    Energy::from_joules(10.0) - states[n].battery,
                    ledger.total(n)
                );
            }
        }
        // 1.4 W * 2.048 ms
        let m = model(false);
        let mut states = nodes(&[(0.0, 0.0), (250.0, 0.0)], 10.0);
        let mut ledger = EnergyLedger::new(2, Energy::from_joules(10.0));
        charge_unicast_hop(&mut ledger, &mut states, 0, 1, 250.0, 512, Payload::Data, &m).unwrap();
        assert_abs_diff_eq!(ledger.consumed(0, Category::DataTx).joules(), 2.8672e-3, epsilon = 1e-12);
    }

    #[test]
    fn exhausted_node_hits_exactly_zero() {
        let m = model(false);
        let mut states = nodes(&[(0.0, 0.0), (100.0, 0.0)], 0.002);
        states[1].battery = Energy::from_joules(1.0);
        let mut ledger = EnergyLedger::new(2, Energy::from_joules(0.002));
        charge_unicast_hop(&mut ledger, &mut states, 0, 1, 100.0, 512, Payload::Data, &m).unwrap();
        assert_eq!(states[0].battery, Energy::ZERO);
        assert_eq!(ledger.total(0), Energy::from_joules(0.002));
        assert_eq!(ledger.take_exhausted(), vec![0]);
        assert!(matches!(
            charge_unicast_hop(&mut ledger, &mut states, 0, 1, 100.0, 512, Payload::Data, &m),
            Err(Error::DeadNode(0))
        ));
        // No further debit lands on the dead node.
        charge_broadcast(&mut ledger, &mut states, 1, [0], 32, Category::Beacon, &m).unwrap();
        assert_eq!(ledger.total(0), Energy::from_joules(0.002));
    }

    #[test]
    fn broadcast_is_linear_in_neighbors() {
        let m = model(false);
        let positions: Vec<(f64, f64)> = (0..11).map(|i| (i as f64, 0.0)).collect();
        let mut states = nodes(&positions, 10.0);
        let mut ledger = EnergyLedger::new(11, Energy::from_joules(10.0));
        charge_broadcast(&mut ledger, &mut states, 0, 1..11, 32, Category::Beacon, &m).unwrap();
        let air = m.airtime(32).unwrap();
        assert_abs_diff_eq!(ledger.grand_total().joules(), (1.4 + 10.0 * 0.967) * air, epsilon = 1e-11);

        let mut alone = EnergyLedger::new(11, Energy::from_joules(10.0));
        let mut states = nodes(&positions, 10.0);
        charge_broadcast(&mut alone, &mut states, 0, [], 32, Category::Beacon, &m).unwrap();
        assert_eq!(alone.grand_total(), alone.total(0));
        assert_abs_diff_eq!(alone.total(0).joules(), 1.4 * air, epsilon = 1e-12);
    }

    #[test]
    fn smallest_flood() {
        let m = model(false);
        let mut states = nodes(&[(0.0, 0.0), (100.0, 0.0)], 10.0);
        let snap = TopologySnapshot::build(&states, 250.0, 0.0);
        let mut ledger = EnergyLedger::new(2, Energy::from_joules(10.0));
        charge_route_discovery(&mut ledger, &mut states, &snap, 0, Some(&[0, 1]), &m).unwrap();

        let rreq0 = m.airtime(64).unwrap();
        let rreq1 = m.airtime(72).unwrap();
        let flood = 1.4 * rreq0 + 0.967 * rreq0 + 1.4 * rreq1 + 0.967 * rreq1;
        let rrep_hop = (1.4 + 0.967) * m.airtime(64 + 20 + 14 + 14).unwrap();
        assert_abs_diff_eq!(ledger.category_total(Category::Discovery).joules(), flood + rrep_hop, epsilon = 1e-11);
        assert_eq!(ledger.grand_total(), ledger.category_total(Category::Discovery));
    }
}
