//! `jtwpa` command-line workbench.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::WorkbenchConfig;
use error::CliError;
use output::Format;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "jtwpa", version, about = "Dual-pump JTWPA simulation, analysis and calibration")]
struct Cli {
    /// JSON config; every section is optional and defaults to the reference device.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for grid commands (overrides simulation.threads).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wavevector and insertion loss over the dispersion grid.
    Dispersion,
    /// Mismatch of every four-wave-mixing process over the signal grid.
    Phasematch,
    /// Phase-insensitive power gain over the signal grid.
    Gain,
    /// Degenerate phase-sensitive gain at the pump centre.
    Pser,
    /// Gain, squeezing and purity at one signal frequency.
    Squeeze,
    /// Squeezing over pump-2 power, signal frequency and loss profile.
    Sweep,
    /// Quadrature dataset to squeezing report.
    Analyze {
        /// Dataset path (overrides paths.dataset).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit a shot-noise tunnel-junction curve.
    CalibrateSntj {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit a two-dimensional qubit scattering scan.
    CalibrateWqed {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Rescale SNTJ system-noise records by the wQED gain.
    CrossCal,
    /// Write a synthetic quadrature dataset.
    Synth(commands::SynthArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => WorkbenchConfig::load(p)?,
        None => WorkbenchConfig::default(),
    };
    match &cli.command {
        Command::Analyze { input: Some(p) } => cfg.paths.dataset = Some(p.clone()),
        Command::CalibrateSntj { input: Some(p) } => cfg.paths.sntj_csv = Some(p.clone()),
        Command::CalibrateWqed { input: Some(p) } => cfg.paths.wqed_csv = Some(p.clone()),
        _ => {}
    }
    // Hash of the effective config before paths are made absolute.
    let config_sha256 = output::sha256_hex(serde_json::to_string(&cfg).map_err(|e| CliError::Config(e.to_string()))?.as_bytes());
    if let Some(dir) = cli.config.as_ref().and_then(|p| p.parent()) {
        cfg.paths.resolve(dir);
    }
    if let Some(n) = cli.threads.or(cfg.simulation.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let (name, out) = match &cli.command {
        Command::Dispersion => ("dispersion", commands::dispersion(&cfg)?),
        Command::Phasematch => ("phasematch", commands::phasematch(&cfg)?),
        Command::Gain => ("gain", commands::gain(&cfg)?),
        Command::Pser => ("pser", commands::pser(&cfg)?),
        Command::Squeeze => ("squeeze", commands::squeeze(&cfg)?),
        Command::Sweep => ("sweep", commands::sweep(&cfg)?),
        Command::Analyze { .. } => ("analyze", commands::analyze(&cfg)?),
        Command::CalibrateSntj { .. } => ("calibrate-sntj", commands::calibrate_sntj(&cfg)?),
        Command::CalibrateWqed { .. } => ("calibrate-wqed", commands::calibrate_wqed(&cfg)?),
        Command::CrossCal => ("cross-cal", commands::cross_cal(&cfg)?),
        Command::Synth(args) => {
            let out = cli.out.as_ref().ok_or_else(|| CliError::Config("synth needs --out".into()))?;
            return commands::synth(&cfg, args, out);
        }
    };
    log::info!("{name}: writing {:?} report", cli.format);
    output::emit(name, config_sha256, out, cli.format, cli.out.as_ref())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WORKBENCH_LOG", "warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
