//! Python bindings: scenario configuration, single runs, aggregation across
//! replications and the closed-form link and radio models.

use std::collections::BTreeMap;

use manet_core::config::{ScenarioConfig, StopCondition};
use manet_core::energy::{Category, PowerModel};
use manet_core::engine;
use manet_core::metrics::{self, MetricsReport, METRIC_NAMES};
use manet_core::mobility::{self, NodeState, Point};
use manet_core::protocols::Protocol;
use manet_core::{Energy, Error, Extended};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.exit_code() == 3 {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Scenario parameters. Defaults are the 1500 J, 1000 s experiment set.
#[pyclass(name = "ScenarioConfig", from_py_object)]
#[derive(Clone)]
struct PyScenarioConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenarioConfig {
    #[new]
    #[pyo3(signature = (protocol = "forp", node_count = 50, session_count = 15, v_max = 10.0, tpc = false, seed = 1))]
    fn new(protocol: &str, node_count: usize, session_count: usize, v_max: f64, tpc: bool, seed: u64) -> PyResult<Self> {
        let protocol: Protocol = protocol.parse().map_err(py_err)?;
        Ok(PyScenarioConfig {
            inner: ScenarioConfig {
                protocol,
                node_count,
                session_count,
                v_max,
                tpc,
                seed,
                ..ScenarioConfig::set1()
            },
        })
    }

    /// 1500 J per node, fixed 1000 s runs.
    #[staticmethod]
    fn set1() -> Self {
        PyScenarioConfig {
            inner: ScenarioConfig::set1(),
        }
    }

    /// 100 J per node, runs end at the first node failure.
    #[staticmethod]
    fn set2() -> Self {
        PyScenarioConfig {
            inner: ScenarioConfig::set2(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_toml_str(text)
            .map(|inner| PyScenarioConfig { inner })
            .map_err(py_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    #[getter]
    fn protocol(&self) -> String {
        self.inner.protocol.to_string()
    }

    #[setter]
    fn set_protocol(&mut self, value: &str) -> PyResult<()> {
        self.inner.protocol = value.parse().map_err(py_err)?;
        Ok(())
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count
    }

    #[setter]
    fn set_node_count(&mut self, value: usize) {
        self.inner.node_count = value;
    }

    #[getter]
    fn session_count(&self) -> usize {
        self.inner.session_count
    }

    #[setter]
    fn set_session_count(&mut self, value: usize) {
        self.inner.session_count = value;
    }

    #[getter]
    fn v_max(&self) -> f64 {
        self.inner.v_max
    }

    #[setter]
    fn set_v_max(&mut self, value: f64) {
        self.inner.v_max = value;
    }

    #[getter]
    fn tpc(&self) -> bool {
        self.inner.tpc
    }

    #[setter]
    fn set_tpc(&mut self, value: bool) {
        self.inner.tpc = value;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, value: u64) {
        self.inner.seed = value;
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[setter]
    fn set_kappa(&mut self, value: f64) {
        self.inner.kappa = value;
    }

    #[getter]
    fn initial_battery(&self) -> f64 {
        self.inner.initial_battery
    }

    #[setter]
    fn set_initial_battery(&mut self, value: f64) {
        self.inner.initial_battery = value;
    }

    /// Simulated duration in seconds, or the safety horizon of a run that
    /// stops at the first failure.
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.stop.horizon()
    }

    /// Sets a fixed run length; the run no longer stops at a failure.
    #[setter]
    fn set_duration(&mut self, seconds: f64) {
        self.inner.stop = StopCondition::Duration { seconds };
    }

    #[getter]
    fn until_failure(&self) -> bool {
        self.inner.stop.stops_at_failure()
    }

    #[setter]
    fn set_until_failure(&mut self, value: bool) {
        let horizon = self.inner.stop.horizon();
        self.inner.stop = if value {
            StopCondition::FirstFailure { horizon }
        } else {
            StopCondition::Duration { seconds: horizon }
        };
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "ScenarioConfig(protocol='{}', node_count={}, session_count={}, v_max={}, tpc={}, seed={})",
            c.protocol,
            c.node_count,
            c.session_count,
            c.v_max,
            c.tpc,
            c.seed
        )
    }
}

/// Outcome of one simulation run.
#[pyclass(name = "RunResult", frozen)]
struct PyRunResult {
    report: MetricsReport,
    end_time: f64,
    first_failure_node: Option<usize>,
    energy_by_category: BTreeMap<String, f64>,
    node_energy: Vec<f64>,
}

#[pymethods]
impl PyRunResult {
    /// Metric name to value; undefined metrics are `None`.
    #[getter]
    fn metrics(&self) -> BTreeMap<&'static str, Option<f64>> {
        METRIC_NAMES.iter().copied().zip(self.report.values()).collect()
    }

    #[getter]
    fn end_time(&self) -> f64 {
        self.end_time
    }

    #[getter]
    fn delivered(&self) -> usize {
        self.report.delivered
    }

    #[getter]
    fn first_failure_node(&self) -> Option<usize> {
        self.first_failure_node
    }

    /// Network-wide energy in Joules per accounting category.
    #[getter]
    fn energy_by_category(&self) -> BTreeMap<String, f64> {
        self.energy_by_category.clone()
    }

    /// Energy consumed by each node in Joules.
    #[getter]
    fn node_energy(&self) -> Vec<f64> {
        self.node_energy.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(end_time={}, delivered={}, route_transitions={})",
            self.end_time, self.report.delivered, self.report.route_transitions
        )
    }
}

/// Runs one scenario to completion. The GIL is released while simulating.
#[pyfunction]
fn run(py: Python<'_>, config: PyScenarioConfig) -> PyResult<PyRunResult> {
    let out = py.detach(|| engine::run(&config.inner)).map_err(py_err)?;
    let energy_by_category = Category::ALL
        .iter()
        .map(|&c| (c.name().to_owned(), out.ledger.category_total(c).joules()))
        .collect();
    Ok(PyRunResult {
        report: MetricsReport::from_run(&out),
        end_time: out.end_time,
        first_failure_node: out.first_failure.map(|f| f.node),
        energy_by_category,
        node_energy: (0..out.ledger.node_count()).map(|n| out.ledger.total(n).joules()).collect(),
    })
}

/// Mean, sample standard deviation and count of each metric over the runs;
/// metrics undefined in every run map to `None`.
#[pyfunction]
fn aggregate(
    results: Vec<PyRef<'_, PyRunResult>>,
) -> PyResult<BTreeMap<&'static str, Option<(f64, f64, usize)>>> {
    let reports: Vec<MetricsReport> = results.iter().map(|r| r.report.clone()).collect();
    let agg = metrics::aggregate(&reports).map_err(py_err)?;
    Ok(agg
        .metrics
        .iter()
        .map(|(name, s)| (*name, s.map(|s| (s.mean, s.stddev, s.n))))
        .collect())
}

fn state(id: usize, (x, y): (f64, f64), speed: f64, heading: f64) -> NodeState {
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

/// Seconds until two nodes within `range` of each other drift apart, or
/// `math.inf` when their relative velocity is zero.
#[pyfunction]
#[pyo3(signature = (pos_i, speed_i, heading_i, pos_j, speed_j, heading_j, range = 250.0))]
fn link_expiration_time(
    pos_i: (f64, f64),
    speed_i: f64,
    heading_i: f64,
    pos_j: (f64, f64),
    speed_j: f64,
    heading_j: f64,
    range: f64,
) -> PyResult<f64> {
    let i = state(0, pos_i, speed_i, heading_i);
    let j = state(1, pos_j, speed_j, heading_j);
    Ok(match mobility::link_expiration_time(&i, &j, range).map_err(py_err)? {
        Extended::Finite(t) => t,
        Extended::Infinite => f64::INFINITY,
    })
}

/// Transmit power in Watts needed to reach distance `d` meters.
#[pyfunction]
#[pyo3(signature = (d, tpc = true, range = 250.0))]
fn tx_power(d: f64, tpc: bool, range: f64) -> PyResult<f64> {
    let c = ScenarioConfig::set1();
    PowerModel::new(tpc, range, c.bitrate, c.packet_sizes)
        .tx_power(d)
        .map_err(py_err)
}

/// Seconds on air for a frame of `bytes` bytes.
#[pyfunction]
#[pyo3(signature = (bytes, bitrate = 2e6))]
fn airtime(bytes: u32, bitrate: f64) -> PyResult<f64> {
    let c = ScenarioConfig::set1();
    PowerModel::new(c.tpc, c.range, bitrate, c.packet_sizes)
        .airtime(bytes)
        .map_err(py_err)
}

#[pymodule]
fn manetsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenarioConfig>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(link_expiration_time, m)?)?;
    m.add_function(wrap_pyfunction!(tx_power, m)?)?;
    m.add_function(wrap_pyfunction!(airtime, m)?)?;
    m.add("METRIC_NAMES", METRIC_NAMES.to_vec())?;
    Ok(())
}
