use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use manet_core::config::{ScenarioConfig, StopCondition};
use manet_core::engine::{self, RunOptions};
use manet_core::metrics::MetricsReport;
use manet_core::output;
use manet_core::protocols::Protocol;
use manet_core::runner::{self, MatrixSpec, Preset};
use manet_core::trace::MobilityTrace;
use manet_core::{Error, Result};

/// MANET route selection simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its metrics (and optional logs) as CSV.
    Run(RunArgs),
    /// Run an experiment matrix and write the comparison table.
    Matrix(MatrixArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Set1,
    Set2,
    Custom,
}

/// Scenario overrides shared by both subcommands; they take precedence
/// over the config file.
#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    battery: Option<f64>,
    /// Fixed run length in seconds.
    #[arg(long, conflicts_with = "until_failure")]
    duration: Option<f64>,
    /// Stop at the first node failure, capped at this many seconds.
    #[arg(long)]
    until_failure: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long)]
    sessions: Option<usize>,
    #[arg(long)]
    tpc: Option<bool>,
    /// Replay motion from this trace CSV.
    #[arg(long)]
    trace_in: Option<PathBuf>,
    /// Write the run's motion to this trace CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    emit_packets: bool,
    #[arg(long)]
    emit_routes: bool,
    /// Also write the per-node energy ledger.
    #[arg(long)]
    emit_ledger: bool,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Restrict to these protocols (comma separated).
    #[arg(long, value_delimiter = ',')]
    protocol: Vec<Protocol>,
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    vmax: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sessions: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    tpc: Vec<bool>,
    /// Mobility traces per cell.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Session draws per trace.
    #[arg(long, default_value_t = 1)]
    session_sets: usize,
    /// Write traces here and replay them in every run.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
}

impl ScenarioArgs {
    fn base(&self) -> Result<ScenarioConfig> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), None | Some(PresetArg::Custom)) => ScenarioConfig::load(path)?,
            (Some(_), Some(_)) => {
                return Err(Error::Config("--config only combines with --preset custom".into()))
            }
            (None, Some(PresetArg::Set2)) => ScenarioConfig::set2(),
            (None, Some(PresetArg::Custom)) => {
                return Err(Error::Config("--preset custom needs --config".into()))
            }
            (None, _) => ScenarioConfig::set1(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(battery) = self.battery {
            config.initial_battery = battery;
        }
        if let Some(seconds) = self.duration {
            config.stop = StopCondition::Duration { seconds };
        }
        if let Some(horizon) = self.until_failure {
            config.stop = StopCondition::FirstFailure { horizon };
        }
        if let Some(kappa) = self.kappa {
            config.kappa = kappa;
        }
        Ok(config)
    }

    fn is_standard_preset(&self) -> bool {
        self.config.is_none() && !matches!(self.preset, Some(PresetArg::Custom))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = args.scenario.base()?;
    if let Some(p) = args.protocol {
        config.protocol = p;
    }
    if let Some(n) = args.nodes {
        config.node_count = n;
    }
    if let Some(v) = args.vmax {
        config.v_max = v;
    }
    if let Some(s) = args.sessions {
        config.session_count = s;
    }
    if let Some(t) = args.tpc {
        config.tpc = t;
    }
    config.validate()?;
    ensure_dir(&args.out_dir)?;

    let replay = args.trace_in.as_deref().map(MobilityTrace::load).transpose()?;
    let out = engine::run_with(
        &config,
        RunOptions {
            replay: replay.as_ref(),
            record_trace: args.trace_out.is_some(),
        },
    )?;
    let report = MetricsReport::from_run(&out);

    let dir = &args.out_dir;
    config.save(&dir.join("scenario.toml"))?;
    output::to_file(&dir.join("metrics.csv"), |w| output::write_metrics(&report, w))?;
    if args.emit_packets {
        output::to_file(&dir.join("packets.csv"), |w| output::write_packets(&out, w))?;
    }
    if args.emit_routes {
        output::to_file(&dir.join("routes.csv"), |w| output::write_routes(&out, w))?;
    }
    if args.emit_ledger {
        output::to_file(&dir.join("ledger.csv"), |w| output::write_ledger(&out, w))?;
    }
    if let (Some(path), Some(trace)) = (&args.trace_out, &out.trace) {
        trace.save(path)?;
    }
    println!(
        "{} n={} v_max={} sessions={} tpc={} seed={}: delivered {} packets, {} routes, end {:.1} s",
        config.protocol,
        config.node_count,
        config.v_max,
        config.session_count,
        config.tpc,
        config.seed,
        report.delivered,
        out.routes.len(),
        out.end_time
    );
    Ok(())
}

fn matrix(args: MatrixArgs) -> Result<()> {
    let base = args.scenario.base()?;
    let preset = match args.scenario.preset {
        _ if !args.scenario.is_standard_preset() => Preset::Custom(base.clone()),
        Some(PresetArg::Set2) => Preset::Set2,
        _ => Preset::Set1,
    };
    let mut spec = MatrixSpec::new(preset);
    // Scenario overrides on a standard preset become a custom base that
    // keeps the preset's axes.
    if !matches!(spec.preset, Preset::Custom(_)) && spec.preset.base() != base {
        spec.preset = Preset::Custom(base.clone());
    }
    spec.base_seed = base.seed;
    spec.traces = args.reps;
    spec.session_sets = args.session_sets;
    if !args.protocol.is_empty() {
        spec.protocols = args.protocol;
    }
    if !args.nodes.is_empty() {
        spec.nodes = args.nodes;
    }
    if !args.vmax.is_empty() {
        spec.v_max = args.vmax;
    }
    if !args.sessions.is_empty() {
        spec.sessions = args.sessions;
    }
    if !args.tpc.is_empty() {
        spec.tpc = args.tpc;
    }
    let result = runner::run_and_write(&spec, args.jobs, &args.out_dir, args.trace_out.as_deref())?;
    println!(
        "{} cells x {} replications -> {}",
        result.cells.len(),
        spec.replications(),
        args.out_dir.join("comparison.csv").display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Matrix(args) => matrix(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
