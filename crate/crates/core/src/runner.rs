//! Batch execution over the experiment matrix
//! {protocol x density x v_max x load x power control} with replications.
//!
//! Replication `(t, s)` uses mobility seed `base_seed + t` and session seed
//! `base_seed + SESSION_SEED_OFFSET + s`. All runs of one replication that
//! share density and v_max therefore see identical motion, whichever
//! protocol, load or power setting they use. With a trace directory the
//! motion is also written to disk once and every run replays that file.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::engine::{self, RunOptions};
use crate::metrics::{aggregate, AggregateReport, MetricsReport, METRIC_NAMES};
use crate::output::{self, Cell};
use crate::protocols::Protocol;
use crate::trace::MobilityTrace;
use crate::{Error, Result};

pub const SESSION_SEED_OFFSET: u64 = 1_000_000;

/// The two experiment sets' parameter lists.
pub const DENSITIES: [usize; 2] = [50, 100];
pub const SPEEDS: [f64; 6] = [5.0, 10.0, 20.0, 30.0, 40.0, 50.0];
pub const LOADS: [usize; 2] = [15, 30];

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Set1,
    Set2,
    /// A single base scenario; its own parameters form a one-cell matrix
    /// unless overridden by the axis filters.
    Custom(ScenarioConfig),
}

impl Preset {
    pub fn base(&self) -> ScenarioConfig {
        match self {
            Preset::Set1 => ScenarioConfig::set1(),
            Preset::Set2 => ScenarioConfig::set2(),
            Preset::Custom(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    pub preset: Preset,
    /// Mobility traces per cell.
    pub traces: usize,
    /// Session draws per trace.
    pub session_sets: usize,
    pub base_seed: u64,
    pub protocols: Vec<Protocol>,
    pub nodes: Vec<usize>,
    pub v_max: Vec<f64>,
    pub sessions: Vec<usize>,
    pub tpc: Vec<bool>,
}

impl MatrixSpec {
    /// Full matrix of a preset with one trace and one session set.
    pub fn new(preset: Preset) -> Self {
        let (nodes, v_max, sessions, tpc) = match &preset {
            Preset::Set1 | Preset::Set2 => {
                (DENSITIES.to_vec(), SPEEDS.to_vec(), LOADS.to_vec(), vec![false, true])
            }
            Preset::Custom(c) => (vec![c.node_count], vec![c.v_max], vec![c.session_count], vec![c.tpc]),
        };
        let protocols = match &preset {
            Preset::Custom(c) => vec![c.protocol],
            _ => Protocol::ALL.to_vec(),
        };
        let base_seed = preset.base().seed;
        MatrixSpec {
            preset,
            traces: 1,
            session_sets: 1,
            base_seed,
            protocols,
            nodes,
            v_max,
            sessions,
            tpc,
        }
    }

    /// Cells in canonical order: nodes, v_max, sessions, tpc, protocol.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &nodes in &self.nodes {
            for &v_max in &self.v_max {
                for &sessions in &self.sessions {
                    for &tpc in &self.tpc {
                        for &protocol in &self.protocols {
                            cells.push(Cell {
                                protocol,
                                nodes,
                                sessions,
                                v_max,
                                tpc,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    pub fn replications(&self) -> usize {
        self.traces * self.session_sets
    }

    /// Scenario of one cell and replication.
    pub fn config(&self, cell: &Cell, trace: usize, session_set: usize) -> ScenarioConfig {
        ScenarioConfig {
            protocol: cell.protocol,
            node_count: cell.nodes,
            session_count: cell.sessions,
            v_max: cell.v_max,
            tpc: cell.tpc,
            seed: self.base_seed + trace as u64,
            session_seed: Some(self.base_seed + SESSION_SEED_OFFSET + session_set as u64),
            ..self.preset.base()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications() == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        let cells = self.cells();
        if cells.is_empty() {
            return Err(Error::Config("matrix filters select no cell".into()));
        }
        for cell in &cells {
            self.config(cell, 0, 0).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: Cell,
    pub trace: usize,
    pub session_set: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct MatrixResult {
    pub runs: Vec<RunRecord>,
    pub cells: Vec<(Cell, AggregateReport)>,
}

pub fn trace_file_name(nodes: usize, v_max: f64, trace: usize) -> String {
    format!("trace_n{nodes}_v{v_max}_t{trace}.csv")
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Executes every cell and replication on a pool of `jobs` threads (all
/// cores when `None`). Results are ordered by cell, then trace, then
/// session set, independent of completion order. When `trace_dir` is
/// given, traces are written there first and every run replays them.
pub fn run_matrix(spec: &MatrixSpec, jobs: Option<usize>, trace_dir: Option<&Path>) -> Result<MatrixResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_matrix_in_pool(spec, trace_dir))
}

fn run_matrix_in_pool(spec: &MatrixSpec, trace_dir: Option<&Path>) -> Result<MatrixResult> {
    let cells = spec.cells();
    let traces = match trace_dir {
        Some(dir) => {
            ensure_writable(dir)?;
            Some(write_traces(spec, dir)?)
        }
        None => None,
    };

    let jobs: Vec<(Cell, usize, usize)> = cells
        .iter()
        .flat_map(|&cell| {
            (0..spec.traces).flat_map(move |t| (0..spec.session_sets).map(move |s| (cell, t, s)))
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(cell, trace, session_set)| {
            let config = spec.config(&cell, trace, session_set);
            let replay = match &traces {
                Some(paths) => {
                    let key = (cell.nodes, cell.v_max.to_bits(), trace);
                    let path = &paths.iter().find(|(k, _)| *k == key).expect("trace written").1;
                    Some(MobilityTrace::load(path)?)
                }
                None => None,
            };
            let output = engine::run_with(
                &config,
                RunOptions {
                    replay: replay.as_ref(),
                    record_trace: false,
                },
            )?;
            Ok(RunRecord {
                cell,
                trace,
                session_set,
                report: MetricsReport::from_run(&output),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per_cell = spec.replications();
    let cells = cells
        .into_iter()
        .zip(runs.chunks(per_cell))
        .map(|(cell, chunk)| {
            let reports: Vec<MetricsReport> = chunk.iter().map(|r| r.report.clone()).collect();
            Ok((cell, aggregate(&reports)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixResult { runs, cells })
}

type TraceKey = (usize, u64, usize);

fn write_traces(spec: &MatrixSpec, dir: &Path) -> Result<Vec<(TraceKey, PathBuf)>> {
    let mut keys = Vec::new();
    for &nodes in &spec.nodes {
        for &v_max in &spec.v_max {
            for t in 0..spec.traces {
                keys.push((nodes, v_max, t));
            }
        }
    }
    keys.par_iter()
        .map(|&(nodes, v_max, t)| {
            let config = ScenarioConfig {
                node_count: nodes,
                v_max,
                seed: spec.base_seed + t as u64,
                ..spec.preset.base()
            };
            let path = dir.join(trace_file_name(nodes, v_max, t));
            MobilityTrace::generate(&config, config.stop.horizon())?.save(&path)?;
            Ok(((nodes, v_max.to_bits(), t), path))
        })
        .collect()
}

/// Writes `comparison.csv` (one row per cell and metric) and `runs.csv`
/// (one row per run) into `out_dir`.
pub fn write_matrix(result: &MatrixResult, out_dir: &Path) -> Result<()> {
    output::to_file(&out_dir.join("comparison.csv"), |w| output::write_comparison(&result.cells, w))?;
    output::to_file(&out_dir.join("runs.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["protocol", "nodes", "sessions", "v_max", "tpc", "trace", "session_set"];
        header.extend(METRIC_NAMES);
        csv.write_record(&header)?;
        for run in &result.runs {
            let c = &run.cell;
            let mut row = vec![
                c.protocol.name().to_string(),
                c.nodes.to_string(),
                c.sessions.to_string(),
                c.v_max.to_string(),
                c.tpc.to_string(),
                run.trace.to_string(),
                run.session_set.to_string(),
            ];
            row.extend(run.report.values().iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            csv.write_record(&row)?;
        }
        csv.flush().map_err(|e| Error::io(out_dir.join("runs.csv"), e))
    })
}

/// Checks `out_dir` is writable, then runs and writes the matrix.
pub fn run_and_write(
    spec: &MatrixSpec,
    jobs: Option<usize>,
    out_dir: &Path,
    trace_dir: Option<&Path>,
) -> Result<MatrixResult> {
    spec.validate()?;
    ensure_writable(out_dir)?;
    let result = run_matrix(spec, jobs, trace_dir)?;
    write_matrix(&result, out_dir)?;
    Ok(result)
}
