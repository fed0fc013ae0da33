//! `exokit`: identification, simulation, control evaluation and EMG
//! reporting for modular hip/knee exoskeletons.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use exokit_core::Layout;

use crate::config::{RunConfig, DEFAULT_OUT};
use crate::error::{CliResult, EXIT_USAGE};
use crate::output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "exokit", version, about, propagate_version = true)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for simulated noise.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the actuator torque model, and optionally the reflected inertia.
    Sysid(SysidArgs),
    /// Regenerate bench trials or the squat task.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Sweep thigh and hip angles through the assistance law.
    ControlEval(ControlEvalArgs),
    /// EMG effort and peak tables from raw recordings or per-rep metrics.
    Emg(EmgArgs),
    /// Collect output directories into one bundle with a manifest.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SysidArgs {
    /// Trial CSVs (`t,i_q,theta,omega,tau_meas`), stacked for one fit.
    #[arg(value_name = "CSV")]
    inputs: Vec<PathBuf>,

    /// Backdrive trial for the inertia stage.
    #[arg(long, value_name = "CSV")]
    inertia: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimulateKind {
    /// Sinusoidal backdrive at zero current, one phase per frequency.
    Backdrive(BackdriveArgs),
    /// Constant torque / speed grid.
    Grid(GridArgs),
    /// Locked-output torque step.
    Step(StepArgs),
    /// Squat lifting and lowering with gravity assistance.
    Squat(SquatArgs),
}

#[derive(Debug, Args)]
struct BackdriveArgs {
    /// Phase frequency in Hz; repeat for several phases.
    #[arg(long = "freq", value_name = "HZ")]
    freqs: Vec<f64>,
    #[arg(long, value_name = "DEG")]
    amp_p2p_deg: Option<f64>,
    /// Seconds per phase.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Torque noise SD, Nm.
    #[arg(long)]
    noise_sigma: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Seconds per grid point.
    #[arg(long)]
    dwell: Option<f64>,
    #[arg(long)]
    sample_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct StepArgs {
    /// Target torque, Nm.
    #[arg(long)]
    torque: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    sample_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct SquatArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    layout: Option<Layout>,
    #[arg(long)]
    reps: Option<usize>,
    /// kg.
    #[arg(long)]
    payload: Option<f64>,
    /// Beats per minute.
    #[arg(long)]
    cadence: Option<f64>,
}

#[derive(Debug, Args)]
struct ControlEvalArgs {
    /// Layouts to sweep; all three when omitted.
    #[arg(long = "layout")]
    layouts: Vec<Layout>,
    /// Angle step, deg.
    #[arg(long, default_value_t = 10.0)]
    step_deg: f64,
    /// Largest thigh and hip angle, deg.
    #[arg(long, default_value_t = 120.0)]
    max_deg: f64,
}

#[derive(Debug, Args)]
struct EmgArgs {
    /// Raw EMG CSV (`t,<channel>,...`).
    #[arg(long, value_name = "CSV")]
    recording: Option<PathBuf>,
    /// MVC trial with the same channels.
    #[arg(long, value_name = "CSV")]
    mvc: Option<PathBuf>,
    /// Thigh angle CSV (`t,theta_t_deg`).
    #[arg(long, value_name = "CSV")]
    thigh: Option<PathBuf>,
    /// Per-rep metrics CSV(s) to tabulate instead of processing a recording.
    #[arg(long = "metrics", value_name = "CSV", conflicts_with_all = ["recording", "mvc", "thigh"])]
    metrics: Vec<PathBuf>,
    /// Expected repetitions; a mismatch is logged.
    #[arg(long)]
    reps: Option<usize>,
    /// Condition label for the metrics file.
    #[arg(long)]
    condition: Option<String>,
    /// Normalize by this percentile of the MVC envelope.
    #[arg(long)]
    mvc_percentile: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directories produced by earlier commands.
    #[arg(required = true, value_name = "DIR")]
    sources: Vec<PathBuf>,
}

/// Resolved global state shared by every command.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub out: OutDir,
}

fn run(cli: Cli) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out_path = cli
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context {
        config,
        seed,
        out: OutDir::create(&out_path)?,
    };
    match cli.command {
        Command::Sysid(a) => commands::sysid::run(&ctx, &a.inputs, a.inertia.as_deref()),
        Command::Simulate { kind } => match kind {
            SimulateKind::Backdrive(a) => {
                let mut c = ctx.config.backdrive.clone();
                if !a.freqs.is_empty() {
                    c.freqs = a.freqs;
                }
                c.amp_p2p_deg = a.amp_p2p_deg.unwrap_or(c.amp_p2p_deg);
                c.duration = a.duration.unwrap_or(c.duration);
                c.sample_rate = a.sample_rate.unwrap_or(c.sample_rate);
                c.noise_sigma = a.noise_sigma.unwrap_or(c.noise_sigma);
                commands::simulate::backdrive(&ctx, &c)
            }
            SimulateKind::Grid(a) => {
                let mut c = ctx.config.grid.clone();
                c.noise_sigma = a.noise_sigma.unwrap_or(c.noise_sigma);
                c.dwell = a.dwell.unwrap_or(c.dwell);
                c.sample_rate = a.sample_rate.unwrap_or(c.sample_rate);
                commands::simulate::grid(&ctx, &c)
            }
            SimulateKind::Step(a) => {
                let mut c = ctx.config.step.clone();
                c.torque = a.torque.unwrap_or(c.torque);
                c.duration = a.duration.unwrap_or(c.duration);
                c.sample_rate = a.sample_rate.unwrap_or(c.sample_rate);
                commands::simulate::step(&ctx, &c)
            }
            SimulateKind::Squat(a) => {
                let mut squat = ctx.config.squat.clone();
                squat.reps = a.reps.unwrap_or(squat.reps);
                squat.payload = a.payload.unwrap_or(squat.payload);
                squat.cadence = a.cadence.unwrap_or(squat.cadence);
                let mut exo = ctx.config.exo;
                exo.alpha = a.alpha.unwrap_or(exo.alpha);
                exo.layout = a.layout.unwrap_or(exo.layout);
                commands::simulate::squat(&ctx, &squat, &exo.normalized())
            }
        },
        Command::ControlEval(a) => {
            let layouts = if a.layouts.is_empty() { Layout::ALL.to_vec() } else { a.layouts };
            commands::control::run(&ctx, &layouts, a.step_deg, a.max_deg)
        }
        Command::Emg(a) => {
            let mut emg = ctx.config.emg.clone();
            emg.condition = a.condition.unwrap_or(emg.condition);
            emg.expected_reps = a.reps.or(emg.expected_reps);
            emg.mvc_percentile = a.mvc_percentile.or(emg.mvc_percentile);
            if !a.metrics.is_empty() {
                return commands::emg::replay(&ctx, &a.metrics);
            }
            let inputs = &ctx.config.inputs;
            let files = commands::emg::Inputs {
                recording: a.recording.or_else(|| inputs.recording.clone()),
                mvc: a.mvc.or_else(|| inputs.mvc.clone()),
                thigh: a.thigh.or_else(|| inputs.thigh.clone()),
            };
            commands::emg::process(&ctx, &files, &emg)
        }
        Command::Report(a) => commands::report::run(&ctx, &a.sources),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EXOKIT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
