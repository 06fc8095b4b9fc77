//! Tick-driven event loop tying mobility, topology, route selection,
//! energy accounting and CBR traffic into one reproducible run.
//!
//! Every tick, in order:
//!
//! 1. advance mobility (or replay the next trace frame) and rebuild the
//!    topology snapshot;
//! 2. emit the beacon round when due;
//! 3. tear down routes whose links broke or whose nodes died;
//! 4. run route discovery for started sessions without a route;
//! 5. generate the tick's CBR packets and push every buffered packet of a
//!    routed session over its route.
//!
//! Battery exhaustion is checked after every charge; with
//! [`StopCondition::FirstFailure`] the run ends at the first one.

pub mod delay;

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ScenarioConfig, StopCondition};
use crate::energy::{
    charge_broadcast, charge_route_discovery, charge_unicast_hop, Category, EnergyLedger, Payload,
    PowerModel,
};
use crate::mobility::{init_mobility, NodeState, RandomWaypoint};
use crate::protocols::{self, Route};
use crate::topology::TopologySnapshot;
use crate::trace::{mobility_rng, MobilityTrace};
use crate::{Energy, Error, NodeId, Result};

pub use delay::{discovery_latency, packet_delay, DelayBreakdown};

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: usize,
    pub source: NodeId,
    pub destination: NodeId,
    /// First packet time, seconds.
    pub start: f64,
    /// Packets per second.
    pub rate: f64,
    pub packet_size: u32,
}

impl Session {
    pub fn packet_time(&self, seq: u64) -> f64 {
        self.start + seq as f64 / self.rate
    }
}

/// Distinct source-destination pairs with start times uniform in [1, 40] s.
pub fn generate_sessions<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Vec<Session> {
    let n = config.node_count;
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(config.session_count);
    let mut sessions = Vec::with_capacity(config.session_count);
    while sessions.len() < config.session_count {
        let source = rng.gen_range(0..n);
        let destination = rng.gen_range(0..n);
        if source == destination || pairs.contains(&(source, destination)) {
            continue;
        }
        pairs.push((source, destination));
        sessions.push(Session {
            id: sessions.len(),
            source,
            destination,
            start: rng.gen_range(1.0..=40.0),
            rate: config.cbr_rate,
            packet_size: config.packet_sizes.data,
        });
    }
    sessions
}

fn session_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub session: usize,
    pub seq: u64,
    pub created_at: f64,
    /// `None` when dropped or still undelivered at the end of the run.
    pub delivered_at: Option<f64>,
    pub hops: u32,
    /// Route that carried the packet, as an index into the run's routes.
    pub route: Option<usize>,
    pub delay: DelayBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstFailure {
    pub time: f64,
    pub node: NodeId,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub sessions: Vec<Session>,
    pub ledger: EnergyLedger,
    /// Node states at the end of the run, batteries included.
    pub final_states: Vec<NodeState>,
    pub packets: Vec<PacketRecord>,
    pub routes: Vec<Route>,
    pub first_failure: Option<FirstFailure>,
    /// Simulated time at which the run ended.
    pub end_time: f64,
    /// Recorded motion, when requested.
    pub trace: Option<MobilityTrace>,
}

impl RunOutput {
    pub fn delivered(&self) -> impl Iterator<Item = &PacketRecord> {
        self.packets.iter().filter(|p| p.delivered_at.is_some())
    }

    pub fn delivered_count(&self) -> usize {
        self.delivered().count()
    }

    pub fn residual(&self, node: NodeId) -> Energy {
        self.final_states[node].battery
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions<'a> {
    /// Replay this motion instead of drawing Random Waypoint motion.
    pub replay: Option<&'a MobilityTrace>,
    /// Keep a copy of the motion in [`RunOutput::trace`].
    pub record_trace: bool,
}

pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    run_with(config, RunOptions::default())
}

pub fn run_with(config: &ScenarioConfig, options: RunOptions<'_>) -> Result<RunOutput> {
    config.validate()?;
    let mut sim = Simulation::new(config, options)?;
    sim.run()?;
    Ok(sim.finish())
}

enum Motion<'a> {
    Live {
        model: RandomWaypoint,
        rng: ChaCha8Rng,
    },
    Replay(&'a MobilityTrace),
}

#[derive(Debug, Default)]
struct SessionState {
    route: Option<usize>,
    buffer: VecDeque<usize>,
    next_seq: u64,
    next_attempt: f64,
    backoff: f64,
    /// Packets sent on the current route that arrive after the current tick.
    in_flight: Vec<usize>,
}

struct Simulation<'a> {
    config: &'a ScenarioConfig,
    model: PowerModel,
    motion: Motion<'a>,
    states: Vec<NodeState>,
    sessions: Vec<Session>,
    session_state: Vec<SessionState>,
    ledger: EnergyLedger,
    packets: Vec<PacketRecord>,
    routes: Vec<Route>,
    first_failure: Option<FirstFailure>,
    stopped: bool,
    end_time: f64,
    trace: Option<MobilityTrace>,
}

impl<'a> Simulation<'a> {
    fn new(config: &'a ScenarioConfig, options: RunOptions<'a>) -> Result<Self> {
        let battery = Energy::from_joules(config.initial_battery);
        let (motion, states) = match options.replay {
            Some(trace) => {
                if trace.node_count != config.node_count {
                    return Err(Error::Config(format!(
                        "trace has {} nodes, scenario has {}",
                        trace.node_count, config.node_count
                    )));
                }
                if (trace.tick - config.tick).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "trace tick {} differs from scenario tick {}",
                        trace.tick, config.tick
                    )));
                }
                let mut states: Vec<NodeState> = (0..config.node_count)
                    .map(|id| NodeState {
                        id,
                        pos: Default::default(),
                        speed: 0.0,
                        heading: 0.0,
                        waypoint: Default::default(),
                        battery,
                        activity: 0,
                    })
                    .collect();
                if !trace.apply(0, &mut states) {
                    return Err(Error::Trace("trace has no frames".into()));
                }
                (Motion::Replay(trace), states)
            }
            None => {
                let mut rng = mobility_rng(config.seed);
                let states = init_mobility(config, &mut rng)?;
                let model = RandomWaypoint::from_config(config)?;
                (Motion::Live { model, rng }, states)
            }
        };
        let sessions = generate_sessions(config, &mut session_rng(config.session_seed()));
        let session_state = sessions
            .iter()
            .map(|_| SessionState {
                backoff: config.tick,
                ..SessionState::default()
            })
            .collect();
        Ok(Simulation {
            config,
            model: PowerModel::from_config(config),
            motion,
            states,
            session_state,
            sessions,
            ledger: EnergyLedger::new(config.node_count, battery),
            packets: Vec::new(),
            routes: Vec::new(),
            first_failure: None,
            stopped: false,
            end_time: 0.0,
            trace: options
                .record_trace
                .then(|| MobilityTrace::new(config.tick, config.node_count)),
        })
    }

    fn run(&mut self) -> Result<()> {
        let tick = self.config.tick;
        let horizon = self.config.stop.horizon();
        let ticks = (horizon / tick).round() as u64;
        let beacon_ticks = self.config.beacon_ticks();
        self.end_time = horizon;
        for k in 0..ticks {
            let now = k as f64 * tick;
            if k > 0 && !self.advance_motion(k as usize) {
                self.end_time = now;
                break;
            }
            if let Some(trace) = &mut self.trace {
                trace.push_frame(&self.states);
            }
            let snapshot = TopologySnapshot::build(&self.states, self.config.range, now);

            if k % beacon_ticks == 0 {
                self.beacon_round(&snapshot, now)?;
            }
            if !self.stopped {
                self.tear_down_broken(&snapshot, now);
                self.discover_routes(&snapshot, now)?;
            }
            if !self.stopped {
                self.send_traffic(&snapshot, now)?;
            }
            if self.stopped {
                self.end_time = self.first_failure.map_or(now, |f| f.time);
                break;
            }
        }
        Ok(())
    }

    fn advance_motion(&mut self, k: usize) -> bool {
        match &mut self.motion {
            Motion::Live { model, rng } => {
                model.advance(&mut self.states, self.config.tick, rng);
                true
            }
            Motion::Replay(trace) => trace.apply(k, &mut self.states),
        }
    }

    /// Records exhausted batteries; returns true when the run must stop.
    fn note_exhaustion(&mut self, time: f64) -> bool {
        let exhausted = self.ledger.take_exhausted();
        if let (None, Some(&node)) = (self.first_failure, exhausted.first()) {
            self.first_failure = Some(FirstFailure { time, node });
            if matches!(self.config.stop, StopCondition::FirstFailure { .. }) {
                self.stopped = true;
            }
        }
        self.stopped
    }

    fn beacon_round(&mut self, snapshot: &TopologySnapshot, now: f64) -> Result<()> {
        let size = self.model.sizes.beacon;
        for node in 0..self.states.len() {
            if !self.states[node].is_alive() {
                continue;
            }
            let neighbors = snapshot.links(node).iter().map(|l| l.neighbor);
            charge_broadcast(
                &mut self.ledger,
                &mut self.states,
                node,
                neighbors,
                size,
                Category::Beacon,
                &self.model,
            )?;
            if self.note_exhaustion(now) {
                return Ok(());
            }
        }
        Ok(())
    }

    fn close_route(&mut self, session: usize, now: f64) {
        let state = &mut self.session_state[session];
        let Some(idx) = state.route.take() else {
            return;
        };
        let route = &mut self.routes[idx];
        route.torn_down_at = Some(now);
        for &m in &route.nodes[1..route.nodes.len() - 1] {
            self.states[m].activity -= 1;
        }
        for p in state.in_flight.drain(..) {
            let packet = &mut self.packets[p];
            if packet.delivered_at.is_some_and(|t| t > now) {
                packet.delivered_at = None;
            }
        }
        state.next_attempt = now;
        state.backoff = self.config.tick;
    }

    fn tear_down_broken(&mut self, snapshot: &TopologySnapshot, now: f64) {
        for s in 0..self.sessions.len() {
            let state = &mut self.session_state[s];
            state
                .in_flight
                .retain(|&p| self.packets[p].delivered_at.is_some_and(|t| t > now));
            if let Some(idx) = state.route {
                if !self.routes[idx].is_valid_in(snapshot) {
                    self.close_route(s, now);
                }
            }
        }
    }

    fn session_live(&self, session: &Session) -> bool {
        self.states[session.source].is_alive() && self.states[session.destination].is_alive()
    }

    fn discover_routes(&mut self, snapshot: &TopologySnapshot, now: f64) -> Result<()> {
        let window_end = now + self.config.tick;
        for s in 0..self.sessions.len() {
            let session = &self.sessions[s];
            let state = &self.session_state[s];
            if state.route.is_some()
                || session.start >= window_end
                || now + 1e-9 < state.next_attempt
                || !self.session_live(session)
            {
                continue;
            }
            let (source, destination) = (session.source, session.destination);
            let selection = protocols::select(
                self.config.protocol,
                snapshot,
                &self.states,
                source,
                destination,
            )?;
            charge_route_discovery(
                &mut self.ledger,
                &mut self.states,
                snapshot,
                source,
                selection.as_ref().map(|sel| sel.nodes.as_slice()),
                &self.model,
            )?;
            if self.note_exhaustion(now) {
                return Ok(());
            }
            let usable = selection.filter(|sel| sel.nodes.iter().all(|&n| self.states[n].is_alive()));
            let state = &mut self.session_state[s];
            match usable {
                Some(sel) => {
                    for &m in sel.intermediates() {
                        self.states[m].activity += 1;
                    }
                    let latency =
                        discovery_latency(sel.hops(), &self.model, self.config.forwarding_overhead);
                    state.route = Some(self.routes.len());
                    state.backoff = self.config.tick;
                    self.routes.push(Route {
                        session: s,
                        nodes: sel.nodes,
                        protocol: self.config.protocol,
                        metric_value: sel.metric,
                        discovered_at: now,
                        ready_at: now + latency,
                        torn_down_at: None,
                    });
                }
                None => {
                    state.next_attempt = now + state.backoff;
                    state.backoff = (state.backoff * 2.0).min(self.config.max_retry_backoff);
                }
            }
        }
        Ok(())
    }

    /// Sources and intermediate forwarders of every live route.
    fn active_transmitters(&self) -> Vec<bool> {
        let mut active = vec![false; self.states.len()];
        for state in &self.session_state {
            if let Some(idx) = state.route {
                let nodes = &self.routes[idx].nodes;
                for &n in &nodes[..nodes.len() - 1] {
                    active[n] = true;
                }
            }
        }
        active
    }

    fn send_traffic(&mut self, snapshot: &TopologySnapshot, now: f64) -> Result<()> {
        let window_end = now + self.config.tick;
        let active = self.active_transmitters();
        for s in 0..self.sessions.len() {
            // New packets for this tick join the session buffer.
            loop {
                let session = &self.sessions[s];
                let state = &mut self.session_state[s];
                let created_at = session.packet_time(state.next_seq);
                if created_at >= window_end {
                    break;
                }
                self.packets.push(PacketRecord {
                    session: s,
                    seq: state.next_seq,
                    created_at,
                    delivered_at: None,
                    hops: 0,
                    route: None,
                    delay: DelayBreakdown::default(),
                });
                state.next_seq += 1;
                state.buffer.push_back(self.packets.len() - 1);
                if state.buffer.len() > self.config.buffer_capacity {
                    state.buffer.pop_front();
                }
            }

            let Some(route_idx) = self.session_state[s].route else {
                continue;
            };
            while let Some(&p) = self.session_state[s].buffer.front() {
                let route = &self.routes[route_idx];
                if !route.nodes.iter().all(|&n| self.states[n].is_alive()) {
                    break;
                }
                let created_at = self.packets[p].created_at;
                let departure = created_at.max(route.ready_at);
                let mut delay = packet_delay(
                    &route.nodes,
                    snapshot,
                    &self.states,
                    &active,
                    0.0,
                    &self.model,
                    self.config.kappa,
                );
                delay.buffering = departure - created_at;
                self.session_state[s].buffer.pop_front();

                let nodes = route.nodes.clone();
                let mut completed = true;
                for hop in nodes.windows(2) {
                    let distance = snapshot.link(hop[0], hop[1]).expect("live route").distance;
                    if !self.states[hop[0]].is_alive() || !self.states[hop[1]].is_alive() {
                        completed = false;
                        break;
                    }
                    charge_unicast_hop(
                        &mut self.ledger,
                        &mut self.states,
                        hop[0],
                        hop[1],
                        distance,
                        self.sessions[s].packet_size,
                        Payload::Data,
                        &self.model,
                    )?;
                    if self.note_exhaustion(departure) {
                        return Ok(());
                    }
                }
                let record = &mut self.packets[p];
                record.route = Some(route_idx);
                record.hops = (nodes.len() - 1) as u32;
                record.delay = delay;
                if completed {
                    let delivered_at = created_at + delay.total();
                    record.delivered_at = Some(delivered_at);
                    if delivered_at > now {
                        self.session_state[s].in_flight.push(p);
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> RunOutput {
        RunOutput {
            config: self.config.clone(),
            sessions: self.sessions,
            ledger: self.ledger,
            final_states: self.states,
            packets: self.packets,
            routes: self.routes,
            first_failure: self.first_failure,
            end_time: self.end_time,
            trace: self.trace,
        }
    }
}
