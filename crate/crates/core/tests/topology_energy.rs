//! Statistical topology properties and the route-discovery energy charge,
//! checked against independent recomputation.

use std::collections::VecDeque;

use manet_core::config::ScenarioConfig;
use manet_core::energy::{charge_route_discovery, Category, EnergyLedger, PowerModel};
use manet_core::mobility::{init_mobility, NodeState};
use manet_core::topology::TopologySnapshot;
use manet_core::trace::mobility_rng;
use manet_core::Energy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_nodes(n: usize, seed: u64) -> Vec<NodeState> {
    let config = ScenarioConfig {
        node_count: n,
        seed,
        ..ScenarioConfig::set1()
    };
    init_mobility(&config, &mut mobility_rng(seed)).unwrap()
}

fn mean_degree(n: usize) -> f64 {
    let total: f64 = (0..20)
        .map(|seed| TopologySnapshot::build(&uniform_nodes(n, seed), 250.0, 0.0).mean_degree())
        .sum();
    total / 20.0
}

#[test]
fn fifty_nodes_have_about_ten_neighbors() {
    let degree = mean_degree(50);
    assert!((7.0..=13.0).contains(&degree), "mean degree {degree}");
}

#[test]
fn doubling_nodes_does_not_lower_degree() {
    let (sparse, dense) = (mean_degree(50), mean_degree(100));
    assert!(dense >= sparse, "{dense} < {sparse}");
}

#[test]
fn snapshots_are_symmetric_and_in_range() {
    for seed in 0..20 {
        let nodes = uniform_nodes(50, seed);
        let snap = TopologySnapshot::build(&nodes, 250.0, 0.0);
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                let d = nodes[i].pos.distance(nodes[j].pos);
                let link = snap.link(i, j);
                assert_eq!(link.is_some(), i != j && d <= 250.0, "{i}-{j} at {d}");
                if let (Some(a), Some(b)) = (link, snap.link(j, i)) {
                    assert_eq!((a.distance, a.expiry), (b.distance, b.expiry));
                }
            }
        }
    }
}

#[test]
fn interference_matches_recount_from_route_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let mut nodes = uniform_nodes(8, rng.gen());
        for n in &mut nodes {
            n.pos.x *= 0.4;
            n.pos.y *= 0.4;
        }
        let routes: Vec<Vec<usize>> = (0..rng.gen_range(0..6))
            .map(|_| (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..8)).collect())
            .collect();
        for route in &routes {
            for &m in &route[1..route.len() - 1] {
                nodes[m].activity += 1;
            }
        }
        let snap = TopologySnapshot::build(&nodes, 250.0, 0.0);
        for node in 0..8 {
            let expected: usize = routes
                .iter()
                .flat_map(|r| r[1..r.len() - 1].iter())
                .filter(|&&m| m != node && nodes[m].pos.distance(nodes[node].pos) <= 250.0)
                .count();
            assert_eq!(snap.traffic_interference(&nodes, node).unwrap(), expected as u64);
        }
    }
}

fn hop_distances(nodes: &[NodeState], source: usize) -> Vec<Option<u32>> {
    let mut hops = vec![None; nodes.len()];
    hops[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for v in 0..nodes.len() {
            if hops[v].is_none() && v != u && nodes[u].pos.distance(nodes[v].pos) <= 250.0 {
                hops[v] = Some(hops[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    hops
}

/// Energy of one flood without a reply, from the degree sequence: every
/// reached node broadcasts an RREQ carrying its hop count at full-range
/// power and each of its neighbors receives it.
fn flood_oracle(nodes: &[NodeState], source: usize, tpc: bool) -> f64 {
    let tx = if tpc { 1.1182 + 7.2e-11 * 250f64.powi(4) } else { 1.4 };
    hop_distances(nodes, source)
        .iter()
        .enumerate()
        .filter_map(|(n, h)| h.map(|h| (n, h)))
        .map(|(n, h)| {
            let airtime = 8.0 * (64.0 + 8.0 * h as f64) / 2e6;
            let degree = (0..nodes.len())
                .filter(|&m| m != n && nodes[m].pos.distance(nodes[n].pos) <= 250.0)
                .count();
            (tx + 0.967 * degree as f64) * airtime
        })
        .sum()
}

fn charge_flood(nodes: &mut [NodeState], source: usize, tpc: bool) -> EnergyLedger {
    let snap = TopologySnapshot::build(nodes, 250.0, 0.0);
    let model = PowerModel::new(tpc, 250.0, 2e6, Default::default());
    let mut ledger = EnergyLedger::new(nodes.len(), nodes[0].battery);
    charge_route_discovery(&mut ledger, nodes, &snap, source, None, &model).unwrap();
    ledger
}

#[test]
fn flood_energy_matches_degree_recount() {
    for seed in 0..20 {
        for tpc in [false, true] {
            let mut nodes = uniform_nodes(50, seed);
            let source = seed as usize % 50;
            let expected = flood_oracle(&nodes, source, tpc);
            let ledger = charge_flood(&mut nodes, source, tpc);
            let got = ledger.category_total(Category::Discovery).joules();
            // One picojoule of rounding per debit at most.
            assert!((got - expected).abs() < 1e-9, "seed {seed}: {got} vs {expected}");
            assert_eq!(ledger.grand_total(), ledger.category_total(Category::Discovery));
        }
    }
}

#[test]
fn flood_with_reply_adds_one_unicast_per_hop() {
    let mut nodes = uniform_nodes(50, 3);
    let snap = TopologySnapshot::build(&nodes, 250.0, 0.0);
    let route = manet_core::protocols::select_forp(&snap, 0, 7).unwrap();
    let Some(route) = route else { return };
    let model = PowerModel::new(false, 250.0, 2e6, Default::default());
    let mut ledger = EnergyLedger::new(50, nodes[0].battery);
    charge_route_discovery(&mut ledger, &mut nodes, &snap, 0, Some(&route.nodes), &model).unwrap();
    let flood = flood_oracle(&uniform_nodes(50, 3), 0, false);
    // RREP exchange per hop: tx (CTS+ACK or RTS+RREP) and rx for both ends.
    let bytes_tx = 20.0 + 64.0 + 14.0 + 14.0;
    let per_hop = (1.4 + 0.967) * 8.0 * bytes_tx / 2e6;
    let expected = flood + per_hop * route.hops() as f64;
    let got = ledger.category_total(Category::Discovery).joules();
    assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
}

#[test]
fn doubling_density_doubles_flood_reception_per_node() {
    let reception = |n: usize| -> f64 {
        (0..20)
            .map(|seed| {
                let mut nodes = uniform_nodes(n, seed);
                let ledger = charge_flood(&mut nodes, 0, false);
                let total = ledger.category_total(Category::Discovery).joules();
                // Subtract the transmit share, recomputed from hop counts.
                let tx: f64 = hop_distances(&uniform_nodes(n, seed), 0)
                    .iter()
                    .flatten()
                    .map(|&h| 1.4 * 8.0 * (64.0 + 8.0 * h as f64) / 2e6)
                    .sum();
                (total - tx) / n as f64
            })
            .sum::<f64>()
            / 20.0
    };
    let ratio = reception(100) / reception(50);
    assert!((1.8..=2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn dead_nodes_are_not_charged() {
    let mut nodes = uniform_nodes(50, 11);
    for n in nodes.iter_mut().skip(25) {
        n.battery = Energy::ZERO;
    }
    let ledger = charge_flood(&mut nodes, 0, false);
    for n in 25..50 {
        assert_eq!(ledger.total(n), Energy::ZERO);
    }
}
