//! Random Waypoint motion and link expiration time prediction.

use std::f64::consts::TAU;

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::{Energy, Error, Extended, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub pos: Point,
    /// m/s
    pub speed: f64,
    /// Direction of motion in radians, `[0, 2π)`.
    pub heading: f64,
    pub waypoint: Point,
    /// Residual battery charge.
    pub battery: Energy,
    /// Number of live routes that use this node as an intermediate forwarder.
    pub activity: u32,
}

impl NodeState {
    pub fn is_alive(&self) -> bool {
        !self.battery.is_zero()
    }

    pub fn velocity(&self) -> (f64, f64) {
        (
            self.speed * self.heading.cos(),
            self.speed * self.heading.sin(),
        )
    }

    pub fn distance(&self, other: &NodeState) -> f64 {
        self.pos.distance(other.pos)
    }
}

/// Direction from `from` to `to`, normalized into `[0, 2π)`.
pub fn heading_towards(from: Point, to: Point) -> f64 {
    let h = (to.y - from.y).atan2(to.x - from.x);
    let h = if h < 0.0 { h + TAU } else { h };
    if h >= TAU {
        0.0
    } else {
        h
    }
}

/// Random Waypoint with zero pause time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWaypoint {
    pub width: f64,
    pub height: f64,
    pub v_max: f64,
    pub min_speed: f64,
}

impl RandomWaypoint {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        if !(config.width > 0.0 && config.height > 0.0) {
            return Err(Error::Config(format!(
                "zero-area rectangle {} x {}",
                config.width, config.height
            )));
        }
        if !(config.v_max > 0.0) {
            return Err(Error::Config(format!("v_max must be positive, got {}", config.v_max)));
        }
        Ok(RandomWaypoint {
            width: config.width,
            height: config.height,
            v_max: config.v_max,
            min_speed: config.min_speed,
        })
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            rng.gen_range(0.0..=self.width),
            rng.gen_range(0.0..=self.height),
        )
    }

    fn random_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.v_max <= self.min_speed {
            self.v_max
        } else {
            rng.gen_range(self.min_speed..=self.v_max)
        }
    }

    fn retarget<R: Rng + ?Sized>(&self, node: &mut NodeState, rng: &mut R) {
        node.waypoint = self.random_point(rng);
        node.speed = self.random_speed(rng);
        node.heading = heading_towards(node.pos, node.waypoint);
    }

    /// Uniform initial placement, each node with a fresh waypoint and speed.
    pub fn init<R: Rng + ?Sized>(
        &self,
        node_count: usize,
        battery: Energy,
        rng: &mut R,
    ) -> Vec<NodeState> {
        (0..node_count)
            .map(|id| {
                let mut node = NodeState {
                    id,
                    pos: self.random_point(rng),
                    speed: 0.0,
                    heading: 0.0,
                    waypoint: Point::default(),
                    battery,
                    activity: 0,
                };
                self.retarget(&mut node, rng);
                node
            })
            .collect()
    }

    /// Moves every node `dt` seconds along its waypoint legs. Arrival within
    /// the step re-targets immediately and spends the leftover time on the
    /// new leg.
    pub fn advance<R: Rng + ?Sized>(&self, states: &mut [NodeState], dt: f64, rng: &mut R) {
        assert!(dt > 0.0, "advance needs a positive step, got {dt}");
        for node in states.iter_mut() {
            let mut remaining = dt;
            while remaining > 0.0 {
                let to_go = node.pos.distance(node.waypoint);
                let reach = node.speed * remaining;
                if reach < to_go {
                    let f = reach / to_go;
                    node.pos.x += (node.waypoint.x - node.pos.x) * f;
                    node.pos.y += (node.waypoint.y - node.pos.y) * f;
                    break;
                }
                node.pos = node.waypoint;
                remaining -= to_go / node.speed;
                self.retarget(node, rng);
            }
            node.pos.x = node.pos.x.clamp(0.0, self.width);
            node.pos.y = node.pos.y.clamp(0.0, self.height);
        }
    }
}

/// Draws the initial node population for a scenario.
pub fn init_mobility<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Vec<NodeState>> {
    if config.node_count < 2 {
        return Err(Error::Config(format!(
            "need at least 2 nodes, got {}",
            config.node_count
        )));
    }
    let model = RandomWaypoint::from_config(config)?;
    Ok(model.init(
        config.node_count,
        Energy::from_joules(config.initial_battery),
        rng,
    ))
}

/// Predicted time until neighbors `i` and `j` leave each other's range `r`,
/// assuming both keep their current velocity. Identical velocity vectors
/// never separate and yield [`Extended::Infinite`].
pub fn link_expiration_time(i: &NodeState, j: &NodeState, r: f64) -> Result<Extended> {
    let dist = i.distance(j);
    if dist > r {
        return Err(Error::NotNeighbors(i.id, j.id, dist, r));
    }
    let (vix, viy) = i.velocity();
    let (vjx, vjy) = j.velocity();
    let a = vix - vjx;
    let b = i.pos.x - j.pos.x;
    let c = viy - vjy;
    let d = i.pos.y - j.pos.y;

    let rel_speed_sq = a * a + c * c;
    if rel_speed_sq == 0.0 {
        return Ok(Extended::Infinite);
    }
    let cross = a * d - b * c;
    let scale = rel_speed_sq * r * r;
    let mut radicand = scale - cross * cross;
    if radicand < 0.0 {
        // Non-negative in exact arithmetic whenever dist <= r.
        assert!(
            radicand >= -1e-9 * scale,
            "negative LET radicand {radicand} for in-range pair {}-{}",
            i.id,
            j.id
        );
        radicand = 0.0;
    }
    let t = (-(a * b + c * d) + radicand.sqrt()) / rel_speed_sq;
    Ok(Extended::Finite(t.max(0.0)))
}
