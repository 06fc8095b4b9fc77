//! Deterministic discrete-event simulator for comparing three on-demand
//! MANET route selection disciplines: stability-based (FORP), power-aware
//! (MMBCR) and load-balancing (LBR).
//!
//! A run advances Random Waypoint mobility in fixed ticks, rebuilds the
//! unit-disk topology, maintains one route per source-destination session,
//! charges every transmission and reception against per-node batteries and
//! records enough per-packet and per-route detail to compute the six
//! comparison metrics:
//!
//! 1. route transitions per session
//! 2. time-averaged hop count
//! 3. end-to-end delay per data packet
//! 4. energy consumed per data packet
//! 5. fairness of node usage (stddev of per-node energy)
//! 6. time of first node failure
//!
//! ```
//! use manet_core::{config::ScenarioConfig, engine, metrics::MetricsReport, protocols::Protocol};
//!
//! let mut config = ScenarioConfig::set1();
//! config.protocol = Protocol::Lbr;
//! config.stop = manet_core::config::StopCondition::Duration { seconds: 60.0 };
//! config.seed = 7;
//! let output = engine::run(&config).unwrap();
//! let report = MetricsReport::from_run(&output);
//! assert!(report.route_transitions >= 1.0);
//! ```

pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod mobility;
pub mod output;
pub mod protocols;
pub mod runner;
pub mod topology;
pub mod trace;
mod value;

pub use error::{Error, Result};
pub use value::{Energy, Extended};

/// Index of a node in the scenario, `0..node_count`.
pub type NodeId = usize;
