//! CSV emission for run results and comparison tables. Floats are written
//! in shortest round-trip form so that readers recover the exact values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::energy::Category;
use crate::engine::RunOutput;
use crate::metrics::{AggregateReport, MetricsReport, METRIC_NAMES};
use crate::protocols::Protocol;
use crate::topology::TopologySnapshot;
use crate::{Error, Result};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io("<csv writer>", e.into_error()))?
        .flush()
        .map_err(|e| Error::io("<csv writer>", e))
}

/// `metric,value` rows; absent metrics have an empty value.
pub fn write_metrics<W: Write>(report: &MetricsReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "value"])?;
    for (name, value) in METRIC_NAMES.iter().zip(report.values()) {
        w.write_record([name.to_string(), opt(value)])?;
    }
    finish(w)
}

/// One row per generated packet; undelivered packets have an empty
/// `delivered_s`.
pub fn write_packets<W: Write>(output: &RunOutput, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["session", "seq", "created_s", "delivered_s", "hops", "buffering_s", "service_s"])?;
    for p in &output.packets {
        let delivered = p.delivered_at.is_some();
        w.write_record([
            p.session.to_string(),
            p.seq.to_string(),
            p.created_at.to_string(),
            opt(p.delivered_at),
            p.hops.to_string(),
            opt(delivered.then_some(p.delay.buffering)),
            opt(delivered.then(|| p.delay.service())),
        ])?;
    }
    finish(w)
}

/// One row per discovered route; routes open at the end of the run have an
/// empty `torn_down_s`.
pub fn write_routes<W: Write>(output: &RunOutput, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["session", "discovered_s", "torn_down_s", "hops", "metric_value", "node_list"])?;
    for r in &output.routes {
        let nodes: Vec<String> = r.nodes.iter().map(usize::to_string).collect();
        w.write_record([
            r.session.to_string(),
            r.discovered_at.to_string(),
            opt(r.torn_down_at),
            r.hops().to_string(),
            r.metric_value.to_string(),
            nodes.join("-"),
        ])?;
    }
    finish(w)
}

/// Per-node energy by category plus residual charge, Joules.
pub fn write_ledger<W: Write>(output: &RunOutput, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "node_id",
        "data_tx_J",
        "data_rx_J",
        "mac_J",
        "beacon_J",
        "discovery_J",
        "total_J",
        "residual_J",
    ])?;
    let ledger = &output.ledger;
    for node in 0..ledger.node_count() {
        let mut row = vec![node.to_string()];
        row.extend(Category::ALL.iter().map(|&c| ledger.consumed(node, c).joules().to_string()));
        row.push(ledger.total(node).joules().to_string());
        row.push(output.residual(node).joules().to_string());
        w.write_record(row)?;
    }
    finish(w)
}

/// Edge list of one snapshot with link distance and expiration time.
pub fn write_topology<W: Write>(snapshot: &TopologySnapshot, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["time_s", "i", "j", "dist_m", "let_s"])?;
    for (i, j, dist, expiry) in snapshot.edges() {
        w.write_record([
            snapshot.time.to_string(),
            i.to_string(),
            j.to_string(),
            dist.to_string(),
            expiry.to_string(),
        ])?;
    }
    finish(w)
}

/// Coordinates of one cell in the experiment matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub protocol: Protocol,
    pub nodes: usize,
    pub sessions: usize,
    pub v_max: f64,
    pub tpc: bool,
}

/// Tidy comparison table, one row per cell and metric.
pub fn write_comparison<W: Write>(rows: &[(Cell, AggregateReport)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["protocol", "nodes", "sessions", "v_max", "tpc", "metric", "mean", "stddev", "n_reps"])?;
    for (cell, agg) in rows {
        for (name, summary) in &agg.metrics {
            w.write_record([
                cell.protocol.name().to_string(),
                cell.nodes.to_string(),
                cell.sessions.to_string(),
                cell.v_max.to_string(),
                cell.tpc.to_string(),
                name.to_string(),
                opt(summary.map(|s| s.mean)),
                opt(summary.map(|s| s.stddev)),
                summary.map_or(0, |s| s.n).to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn to_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    f(BufWriter::new(file))
}
