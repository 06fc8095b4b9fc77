//! Mobility traces: one frame of node kinematics per tick, stored as CSV
//! `time_s,node_id,x_m,y_m,speed_mps,heading_rad` so that the same motion
//! can be replayed under every protocol.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::mobility::{init_mobility, NodeState, Point, RandomWaypoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub time_s: f64,
    pub node_id: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub speed_mps: f64,
    pub heading_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub pos: Point,
    pub speed: f64,
    pub heading: f64,
}

impl From<&NodeState> for Kinematics {
    fn from(n: &NodeState) -> Self {
        Kinematics {
            pos: n.pos,
            speed: n.speed,
            heading: n.heading,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityTrace {
    pub tick: f64,
    pub node_count: usize,
    frames: Vec<Vec<Kinematics>>,
}

/// Seeds the mobility stream for a run. Protocol, power control and the
/// session draw never touch this stream, so runs sharing a seed share
/// their motion.
pub fn mobility_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

impl MobilityTrace {
    pub fn new(tick: f64, node_count: usize) -> Self {
        MobilityTrace {
            tick,
            node_count,
            frames: Vec::new(),
        }
    }

    /// Random Waypoint trace covering `[0, duration)` at the config's tick.
    pub fn generate(config: &ScenarioConfig, duration: f64) -> Result<Self> {
        config.validate()?;
        let mut rng = mobility_rng(config.seed);
        let model = RandomWaypoint::from_config(config)?;
        let mut states = init_mobility(config, &mut rng)?;
        let ticks = (duration / config.tick).round() as u64;
        let mut trace = MobilityTrace::new(config.tick, config.node_count);
        for k in 0..ticks {
            if k > 0 {
                model.advance(&mut states, config.tick, &mut rng);
            }
            trace.push_frame(&states);
        }
        Ok(trace)
    }

    pub fn push_frame(&mut self, states: &[NodeState]) {
        debug_assert_eq!(states.len(), self.node_count);
        self.frames.push(states.iter().map(Kinematics::from).collect());
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, k: usize) -> Option<&[Kinematics]> {
        self.frames.get(k).map(Vec::as_slice)
    }

    /// Time covered by the trace.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 * self.tick
    }

    /// Overwrites the kinematic fields of `states` with frame `k`.
    pub fn apply(&self, k: usize, states: &mut [NodeState]) -> bool {
        let Some(frame) = self.frames.get(k) else {
            return false;
        };
        for (node, kin) in states.iter_mut().zip(frame) {
            node.pos = kin.pos;
            node.speed = kin.speed;
            node.heading = kin.heading;
            node.waypoint = kin.pos;
        }
        true
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, frame) in self.frames.iter().enumerate() {
            let time_s = k as f64 * self.tick;
            for (node_id, kin) in frame.iter().enumerate() {
                w.serialize(TraceRow {
                    time_s,
                    node_id,
                    x_m: kin.pos.x,
                    y_m: kin.pos.y,
                    speed_mps: kin.speed,
                    heading_rad: kin.heading,
                })?;
            }
        }
        w.flush().map_err(|e| Error::io("<trace writer>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(file))
    }

    /// Reads a trace; rows must be grouped by tick with node ids `0..n` in
    /// order and evenly spaced timestamps.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rows = csv::Reader::from_reader(reader);
        let mut frames: Vec<Vec<Kinematics>> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for row in rows.deserialize() {
            let row: TraceRow = row?;
            if row.node_id == 0 {
                frames.push(Vec::new());
                times.push(row.time_s);
            }
            let frame = frames
                .last_mut()
                .ok_or_else(|| Error::Trace("first row must be node 0".into()))?;
            if row.node_id != frame.len() {
                return Err(Error::Trace(format!(
                    "expected node {} at t={}, found node {}",
                    frame.len(),
                    row.time_s,
                    row.node_id
                )));
            }
            if row.time_s != *times.last().expect("pushed with the frame") {
                return Err(Error::Trace(format!(
                    "node {} has time {} inside frame at {}",
                    row.node_id,
                    row.time_s,
                    times.last().unwrap()
                )));
            }
            frame.push(Kinematics {
                pos: Point::new(row.x_m, row.y_m),
                speed: row.speed_mps,
                heading: row.heading_rad,
            });
        }
        let node_count = frames.first().map_or(0, Vec::len);
        if node_count == 0 {
            return Err(Error::Trace("trace has no rows".into()));
        }
        if let Some(bad) = frames.iter().position(|f| f.len() != node_count) {
            return Err(Error::Trace(format!(
                "frame {bad} has {} nodes, expected {node_count}",
                frames[bad].len()
            )));
        }
        let tick = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
        if !(tick > 0.0) {
            return Err(Error::Trace(format!("non-increasing timestamps ({tick})")));
        }
        for (k, t) in times.iter().enumerate() {
            if (t - k as f64 * tick).abs() > 1e-6 {
                return Err(Error::Trace(format!("frame {k} has time {t}, expected {}", k as f64 * tick)));
            }
        }
        Ok(MobilityTrace {
            tick,
            node_count,
            frames,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
