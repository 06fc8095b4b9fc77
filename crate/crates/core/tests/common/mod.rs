//! Brute-force oracles shared by the oracle tests and the acceptance suite.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::f64::consts::TAU;

use manet_core::mobility::{NodeState, Point};
use manet_core::topology::TopologySnapshot;
use manet_core::{Energy, Extended, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const RANGE: f64 = 250.0;
pub const HORIZON: f64 = 300.0;
pub const STEP: f64 = 1e-3;

pub fn node(id: usize, x: f64, y: f64, speed: f64, heading: f64) -> NodeState {
    NodeState {
        id,
        pos: Point::new(x, y),
        speed,
        heading,
        waypoint: Point::new(x, y),
        battery: Energy::from_joules(1.0),
        activity: 0,
    }
}

/// First 1 ms step at which the pair is farther apart than `RANGE`, or
/// `None` if they stay connected through `HORIZON`.
pub fn first_exit(i: &NodeState, j: &NodeState) -> Option<f64> {
    let (vix, viy) = (i.speed * i.heading.cos(), i.speed * i.heading.sin());
    let (vjx, vjy) = (j.speed * j.heading.cos(), j.speed * j.heading.sin());
    let steps = (HORIZON / STEP).round() as u64;
    (1..=steps).map(|k| k as f64 * STEP).find(|&t| {
        let dx = (i.pos.x + vix * t) - (j.pos.x + vjx * t);
        let dy = (i.pos.y + viy * t) - (j.pos.y + vjy * t);
        (dx * dx + dy * dy).sqrt() > RANGE
    })
}

pub fn random_pair(rng: &mut ChaCha8Rng) -> (NodeState, NodeState) {
    let x = rng.gen_range(0.0..1000.0);
    let y = rng.gen_range(0.0..1000.0);
    let dist = RANGE * rng.gen::<f64>().sqrt();
    let angle = rng.gen_range(0.0..TAU);
    let i = node(0, x, y, rng.gen_range(0.0..=50.0), rng.gen_range(0.0..TAU));
    let j = match rng.gen_range(0..10) {
        // Same velocity: the pair never separates.
        0 => node(1, x + dist * angle.cos(), y + dist * angle.sin(), i.speed, i.heading),
        // Stationary partner.
        1 => node(1, x + dist * angle.cos(), y + dist * angle.sin(), 0.0, 0.0),
        _ => node(
            1,
            x + dist * angle.cos(),
            y + dist * angle.sin(),
            rng.gen_range(0.0..=50.0),
            rng.gen_range(0.0..TAU),
        ),
    };
    (i, j)
}

pub const TRIALS: usize = 500;

pub struct Instance {
    pub snapshot: TopologySnapshot,
    pub states: Vec<NodeState>,
    pub source: NodeId,
    pub destination: NodeId,
}

/// Connected graph on 2..=8 nodes: a random spanning tree plus random
/// extra edges. Weights come from small sets so that ties are common.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(2..=8);
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(NodeId, NodeId)> = (1..n)
        .map(|k| (order[k], order[rng.gen_range(0..k)]))
        .collect();
    let density = rng.gen_range(0.0..0.7);
    for a in 0..n {
        for b in a + 1..n {
            let present = edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
            if !present && rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    let links: Vec<_> = edges
        .iter()
        .map(|&(a, b)| {
            let expiry = if rng.gen_bool(0.1) {
                Extended::Infinite
            } else {
                Extended::Finite(rng.gen_range(1..=6) as f64 * 2.5)
            };
            (a, b, rng.gen_range(1.0..250.0), expiry)
        })
        .collect();
    let snapshot = TopologySnapshot::from_links(n, 250.0, 0.0, links).unwrap();
    let states = (0..n)
        .map(|id| NodeState {
            id,
            pos: Point::default(),
            speed: 0.0,
            heading: 0.0,
            waypoint: Point::default(),
            battery: Energy::from_joules(rng.gen_range(1..=4) as f64),
            activity: rng.gen_range(0..=3),
        })
        .collect();
    let source = rng.gen_range(0..n);
    let destination = (source + rng.gen_range(1..n)) % n;
    Instance {
        snapshot,
        states,
        source,
        destination,
    }
}

pub fn simple_paths(snapshot: &TopologySnapshot, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    fn extend(snapshot: &TopologySnapshot, d: NodeId, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let u = *path.last().unwrap();
        if u == d {
            out.push(path.clone());
            return;
        }
        for v in 0..snapshot.node_count() {
            if snapshot.link(u, v).is_some() && !path.contains(&v) {
                path.push(v);
                extend(snapshot, d, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(snapshot, d, &mut vec![s], &mut out);
    out
}

/// Best path under `better` (returns Greater when the first score wins),
/// then fewer hops, then the lexicographically smallest sequence.
pub fn best_by<T: Copy>(
    paths: &[Vec<NodeId>],
    score: impl Fn(&[NodeId]) -> T,
    better: impl Fn(T, T) -> Ordering,
) -> Option<(Vec<NodeId>, T)> {
    paths
        .iter()
        .map(|p| (p.clone(), score(p)))
        .min_by(|(pa, sa), (pb, sb)| {
            better(*sa, *sb)
                .reverse()
                .then(pa.len().cmp(&pb.len()))
                .then(pa.cmp(pb))
        })
}

pub fn forp_score(snapshot: &TopologySnapshot, path: &[NodeId]) -> Extended {
    path.windows(2)
        .map(|w| snapshot.link(w[0], w[1]).unwrap().expiry)
        .min()
        .unwrap()
}

pub fn mmbcr_score(states: &[NodeState], path: &[NodeId]) -> Extended {
    path[1..path.len() - 1]
        .iter()
        .map(|&m| Extended::Finite(states[m].battery.joules()))
        .min()
        .unwrap_or(Extended::Infinite)
}

pub fn lbr_score(snapshot: &TopologySnapshot, states: &[NodeState], path: &[NodeId]) -> u64 {
    path[1..path.len() - 1]
        .iter()
        .map(|&m| {
            let neighbors: u64 = (0..snapshot.node_count())
                .filter(|&v| snapshot.link(m, v).is_some())
                .map(|v| u64::from(states[v].activity))
                .sum();
            u64::from(states[m].activity) + neighbors
        })
        .sum()
}

