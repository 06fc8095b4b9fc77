//! Scenario parameterization, experiment presets and the TOML config file.
//!
//! A config file is plain TOML whose keys mirror [`ScenarioConfig`]; every
//! key is optional and falls back to the experiment-set-1 defaults:
//!
//! ```toml
//! protocol = "forp"          # forp | lbr | mmbcr
//! node_count = 50
//! width = 1000.0
//! height = 1000.0
//! range = 250.0
//! v_max = 10.0
//! session_count = 15
//! initial_battery = 1500.0
//! tpc = false
//! seed = 1
//!
//! [stop]
//! kind = "duration"          # or "first_failure" with `horizon = ...`
//! seconds = 1000.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::PacketSizes;
use crate::protocols::Protocol;
use crate::{Error, Result};

/// When a run ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopCondition {
    /// Fixed simulated duration in seconds.
    Duration { seconds: f64 },
    /// Stop at the first battery exhaustion. `horizon` caps the run when no
    /// node ever fails (e.g. an idle network).
    FirstFailure { horizon: f64 },
}

impl StopCondition {
    pub fn horizon(&self) -> f64 {
        match *self {
            StopCondition::Duration { seconds } => seconds,
            StopCondition::FirstFailure { horizon } => horizon,
        }
    }

    pub fn stops_at_failure(&self) -> bool {
        matches!(self, StopCondition::FirstFailure { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    /// Area width in meters.
    pub width: f64,
    /// Area height in meters.
    pub height: f64,
    pub node_count: usize,
    /// Transmission range in meters.
    pub range: f64,
    /// Maximum Random Waypoint speed in m/s.
    pub v_max: f64,
    /// Lower bound of the speed draw; a zero speed would strand a node.
    pub min_speed: f64,
    pub session_count: usize,
    /// CBR packets per second per session.
    pub cbr_rate: f64,
    /// Initial battery charge per node in Joules.
    pub initial_battery: f64,
    pub stop: StopCondition,
    /// Transmission power control.
    pub tpc: bool,
    /// Seed of the mobility stream.
    pub seed: u64,
    /// Seed of the session draw; defaults to `seed`.
    pub session_seed: Option<u64>,
    /// Channel bitrate in bits per second.
    pub bitrate: f64,
    /// Contention coefficient of the delay model.
    pub kappa: f64,
    /// Per-hop processing overhead added to discovery latency, seconds.
    pub forwarding_overhead: f64,
    pub beacon_interval: f64,
    /// Mobility/topology tick in seconds.
    pub tick: f64,
    /// Packets buffered per session while no route is available.
    pub buffer_capacity: usize,
    /// Upper bound of the exponential backoff between failed discoveries.
    pub max_retry_backoff: f64,
    pub packet_sizes: PacketSizes,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::set1()
    }
}

impl ScenarioConfig {
    /// 1500 J per node, 1000 s runs.
    pub fn set1() -> Self {
        ScenarioConfig {
            protocol: Protocol::Forp,
            width: 1000.0,
            height: 1000.0,
            node_count: 50,
            range: 250.0,
            v_max: 10.0,
            min_speed: 0.01,
            session_count: 15,
            cbr_rate: 4.0,
            initial_battery: 1500.0,
            stop: StopCondition::Duration { seconds: 1000.0 },
            tpc: false,
            seed: 1,
            session_seed: None,
            bitrate: 2e6,
            kappa: 0.5,
            forwarding_overhead: 1e-3,
            beacon_interval: 1.0,
            tick: 0.1,
            buffer_capacity: 64,
            max_retry_backoff: 1.0,
            packet_sizes: PacketSizes::default(),
        }
    }

    /// 100 J per node, run until the first node failure.
    pub fn set2() -> Self {
        ScenarioConfig {
            initial_battery: 100.0,
            stop: StopCondition::FirstFailure { horizon: 50_000.0 },
            ..ScenarioConfig::set1()
        }
    }

    pub fn session_seed(&self) -> u64 {
        self.session_seed.unwrap_or(self.seed)
    }

    /// Number of mobility ticks between beacon rounds.
    pub fn beacon_ticks(&self) -> u64 {
        ((self.beacon_interval / self.tick).round() as u64).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.width > 0.0 && self.height > 0.0) {
            return fail(format!(
                "area must have positive extent, got {} x {}",
                self.width, self.height
            ));
        }
        if self.node_count < 2 {
            return fail(format!("need at least 2 nodes, got {}", self.node_count));
        }
        if !(self.range > 0.0) {
            return fail(format!("range must be positive, got {}", self.range));
        }
        if !(self.v_max > 0.0) {
            return fail(format!("v_max must be positive, got {}", self.v_max));
        }
        if !(self.min_speed > 0.0) {
            return fail(format!("min_speed must be positive, got {}", self.min_speed));
        }
        if !(self.cbr_rate > 0.0) {
            return fail(format!("cbr_rate must be positive, got {}", self.cbr_rate));
        }
        if !(self.initial_battery > 0.0) {
            return fail(format!(
                "initial_battery must be positive, got {}",
                self.initial_battery
            ));
        }
        if !(self.stop.horizon() > 0.0) {
            return fail(format!("stop horizon must be positive, got {:?}", self.stop));
        }
        if !(self.bitrate > 0.0) {
            return fail(format!("bitrate must be positive, got {}", self.bitrate));
        }
        if !(self.kappa >= 0.0) {
            return fail(format!("kappa must be non-negative, got {}", self.kappa));
        }
        if !(self.forwarding_overhead >= 0.0) {
            return fail(format!(
                "forwarding_overhead must be non-negative, got {}",
                self.forwarding_overhead
            ));
        }
        if !(self.tick > 0.0) {
            return fail(format!("tick must be positive, got {}", self.tick));
        }
        if !(self.beacon_interval >= self.tick) {
            return fail(format!(
                "beacon_interval {} is shorter than the tick {}",
                self.beacon_interval, self.tick
            ));
        }
        if self.buffer_capacity == 0 {
            return fail("buffer_capacity must be positive".into());
        }
        if !(self.max_retry_backoff >= self.tick) {
            return fail(format!(
                "max_retry_backoff {} is shorter than the tick {}",
                self.max_retry_backoff, self.tick
            ));
        }
        if self.session_count > self.node_count * (self.node_count - 1) {
            return fail(format!(
                "{} sessions cannot be drawn as distinct pairs of {} nodes",
                self.session_count, self.node_count
            ));
        }
        self.packet_sizes.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}
