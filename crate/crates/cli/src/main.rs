// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trion_cli::fitting::{fit, FitKind, FitRequest};
use trion_cli::{load_config, run, selftest, Experiment, RunConfig};

const USAGE_ERROR: u8 = 2;

/// Lindblad simulation of a pulse-driven four-level trion system.
#[derive(Parser)]
#[command(name = "trion-dynamics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file (a manifest.json from an earlier run also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Laser detuning in GHz (overrides sequence.detuning)
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
    /// Override a config value: dotted path or unique key, value as JSON
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Signal after one pulse versus pulse area
    Rabi(Common),
    /// Two-pulse fringes versus fine delay
    Ramsey(Common),
    /// Fringe amplitude versus coarse delay with decay fits
    Coherence(Common),
    /// Signal over per-pulse area and fine delay
    Map(Common),
    /// Magneto-optical line positions versus field
    Zeeman(Common),
    /// Fit a curve to CSV data
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: FitKind,
        /// CSV with a header row
        #[arg(long)]
        data: PathBuf,
        /// Simulated (area, signal) CSV for calibration
        #[arg(long)]
        model: Option<PathBuf>,
        /// x column name (default: first column)
        #[arg(long)]
        x: Option<String>,
        /// y column name (default: last column)
        #[arg(long)]
        y: Option<String>,
        /// Sinusoid frequency hint, cycles/fs (default: laser frequency)
        #[arg(long)]
        freq_hint: Option<f64>,
    },
    /// Invariant and oracle-equivalence battery
    Selftest(Common),
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    eprintln!("usage: trion-dynamics <rabi|ramsey|coherence|map|zeeman|fit|selftest> [--config <path>] [--out <dir>] [--detuning <GHz>] [--set key=value]...");
    ExitCode::from(USAGE_ERROR)
}

fn config(common: &Common, experiment: Option<Experiment>) -> Result<RunConfig, ExitCode> {
    let text = match &common.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => return Err(usage_error(format!("cannot read config {}: {e}", p.display()))),
        },
        None => None,
    };
    let mut c = load_config(text.as_deref(), experiment, common.detuning, &common.set).map_err(usage_error)?;
    if let Some(out) = &common.out {
        c.output_dir = out.clone();
    }
    Ok(c)
}

fn simulate(common: &Common, experiment: Experiment) -> ExitCode {
    let c = match config(common, Some(experiment)) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run(&c) {
        Ok(s) if s.ok() => {
            println!("{}: {} rows in {} ({:.2} s)", experiment.name(), s.rows, s.out_dir.display(), s.wall_time_s);
            ExitCode::SUCCESS
        }
        Ok(s) => {
            eprintln!(
                "{}: run incomplete, {} rows flushed to {}: {}",
                experiment.name(),
                s.rows,
                s.out_dir.display(),
                s.error.as_deref().unwrap_or("some grid points failed")
            );
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Rabi(c) => simulate(&c, Experiment::Rabi),
        Command::Ramsey(c) => simulate(&c, Experiment::Ramsey),
        Command::Coherence(c) => simulate(&c, Experiment::Coherence),
        Command::Map(c) => simulate(&c, Experiment::Map),
        Command::Zeeman(c) => simulate(&c, Experiment::Zeeman),
        Command::Fit { common, kind, data, model, x, y, freq_hint } => {
            let c = match config(&common, None) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match fit(&FitRequest { kind, data, model, x, y, freq_hint }, &c) {
                Ok(path) => {
                    println!("fit: wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Selftest(common) => {
            let c = match config(&common, None) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let checks = selftest::battery(c.seed, &c.system);
            for ch in &checks {
                println!("{} {}: {}", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.detail);
            }
            if checks.iter().all(|c| c.pass) {
                println!("selftest: all checks pass");
                ExitCode::SUCCESS
            } else {
                println!("selftest: failures");
                ExitCode::FAILURE
            }
        }
    }
}
