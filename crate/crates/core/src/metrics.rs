//! The six comparison metrics for a single run and their aggregation
//! across replications.

use serde::Serialize;

use crate::energy::{Category, EnergyLedger};
use crate::engine::{RunOutput, Session};
use crate::protocols::Route;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Mean number of route discoveries per session, initial one included.
    pub route_transitions: f64,
    /// Time-averaged hops per path, averaged over sessions.
    pub hop_count: Option<f64>,
    /// Mean end-to-end delay of delivered packets, seconds.
    pub delay_per_packet: Option<f64>,
    /// Joules per delivered packet, beacons excluded.
    pub energy_per_packet: Option<f64>,
    /// Population stddev of per-node consumed energy, Joules.
    pub fairness_stddev: f64,
    pub first_failure_time: Option<f64>,
    pub delivered: usize,
    /// Mean time spent waiting for a route, seconds.
    pub mean_buffering: Option<f64>,
    /// Mean medium access, transmission and propagation time, seconds.
    pub mean_service: Option<f64>,
}

/// Metric names in report order, as used in CSV output.
pub const METRIC_NAMES: [&str; 9] = [
    "route_transitions",
    "hop_count",
    "delay_per_packet",
    "energy_per_packet",
    "fairness_stddev",
    "first_failure_time",
    "delivered",
    "mean_buffering",
    "mean_service",
];

impl MetricsReport {
    pub fn from_run(output: &RunOutput) -> Self {
        let delivered: Vec<_> = output.delivered().collect();
        let mean = |f: &dyn Fn(&crate::engine::PacketRecord) -> f64| {
            (!delivered.is_empty())
                .then(|| delivered.iter().map(|p| f(p)).sum::<f64>() / delivered.len() as f64)
        };
        MetricsReport {
            route_transitions: route_transitions(&output.routes, &output.sessions),
            hop_count: time_averaged_hop_count(&output.routes, output.end_time),
            delay_per_packet: mean(&|p| p.delivered_at.unwrap() - p.created_at),
            energy_per_packet: energy_per_packet(&output.ledger, delivered.len()),
            fairness_stddev: fairness_stddev(&output.ledger),
            first_failure_time: output.first_failure.map(|f| f.time),
            delivered: delivered.len(),
            mean_buffering: mean(&|p| p.delay.buffering),
            mean_service: mean(&|p| p.delay.service()),
        }
    }

    /// Values in [`METRIC_NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 9] {
        [
            Some(self.route_transitions),
            self.hop_count,
            self.delay_per_packet,
            self.energy_per_packet,
            Some(self.fairness_stddev),
            self.first_failure_time,
            Some(self.delivered as f64),
            self.mean_buffering,
            self.mean_service,
        ]
    }
}

/// Mean number of discoveries per session. Zero sessions give zero.
pub fn route_transitions(routes: &[Route], sessions: &[Session]) -> f64 {
    if sessions.is_empty() {
        return 0.0;
    }
    routes.len() as f64 / sessions.len() as f64
}

/// Per session, lifetime-weighted mean hops, then the mean over sessions
/// with nonzero total lifetime. Routes still up are measured to `end`.
pub fn time_averaged_hop_count(routes: &[Route], end: f64) -> Option<f64> {
    let sessions = routes.iter().map(|r| r.session).max()?;
    let mut weighted = vec![0.0; sessions + 1];
    let mut lifetime = vec![0.0; sessions + 1];
    for r in routes {
        let life = r.lifetime(end);
        weighted[r.session] += r.hops() as f64 * life;
        lifetime[r.session] += life;
    }
    let per_session: Vec<f64> = weighted
        .iter()
        .zip(&lifetime)
        .filter(|(_, &l)| l > 0.0)
        .map(|(w, l)| w / l)
        .collect();
    (!per_session.is_empty()).then(|| per_session.iter().sum::<f64>() / per_session.len() as f64)
}

pub fn energy_per_packet(ledger: &EnergyLedger, delivered: usize) -> Option<f64> {
    if delivered == 0 {
        return None;
    }
    let total: f64 = [Category::DataTx, Category::DataRx, Category::Mac, Category::Discovery]
        .into_iter()
        .map(|c| ledger.category_total(c).joules())
        .sum();
    Some(total / delivered as f64)
}

pub fn fairness_stddev(ledger: &EnergyLedger) -> f64 {
    let totals: Vec<f64> = (0..ledger.node_count()).map(|n| ledger.total(n).joules()).collect();
    population_stddev(&totals)
}

pub fn population_stddev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Mean and sample stddev of one metric across replications. Absent values
/// are skipped, so `n` may be smaller than the number of reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Summary { mean, stddev, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub reports: usize,
    /// One entry per metric in [`METRIC_NAMES`] order; `None` when no
    /// report had a value.
    pub metrics: Vec<(&'static str, Option<Summary>)>,
}

impl AggregateReport {
    pub fn get(&self, name: &str) -> Option<Summary> {
        self.metrics.iter().find(|(n, _)| *n == name).and_then(|(_, s)| *s)
    }
}

pub fn aggregate(reports: &[MetricsReport]) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let metrics = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let values: Vec<f64> = reports.iter().filter_map(|r| r.values()[i]).collect();
            (name, Summary::of(&values))
        })
        .collect();
    Ok(AggregateReport {
        reports: reports.len(),
        metrics,
    })
}
