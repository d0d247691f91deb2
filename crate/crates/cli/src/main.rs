//! `conic-spectra`: configuration-driven front end for the spectral computations.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use conic_spectra::geometry::dodziuk_interval;
use conic_spectra::{Error, Result};

use crate::config::{Format, RunConfig};
use crate::output::{fmt_num, pretty, Writer, VERSION};

#[derive(Parser)]
#[command(name = "conic-spectra", version, about = "Hodge–de Rham spectra of collapsing conical connected sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Channels of the tangential operator: modes.csv.
    Modes(RunArgs),
    /// Spectra of M₁ and every M_ε: spectrum.csv.
    Spectrum(RunArgs),
    /// Convergence sweep over ε: sweep.csv and plots.
    Sweep(RunArgs),
    /// Kernel of the limit problem on M₂: aps_kernel.json.
    ApsKernel(RunArgs),
    /// Cover lower bound for every ε: mcgowan.csv.
    Mcgowan(RunArgs),
    /// Eigenvalue interval under a metric pinching e^{−η}g ≤ ḡ ≤ e^{η}g.
    Dodziuk(DodziukArgs),
    /// Print the JSON schema of the configuration.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format (overrides the configuration).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Emit SVG plots.
    #[arg(long)]
    svg: bool,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Recorded in the report; the computations are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DodziukArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
}

const EXIT_CHECKS: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn error_record(command: &str, e: &Error) -> serde_json::Value {
    json!({ "command": command, "error": { "kind": e.kind(), "message": e.to_string() } })
}

fn run(name: &str, args: &RunArgs) -> Result<bool> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &args.out {
        config.output.dir = dir.clone();
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    config.output.svg |= args.svg;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::Domain("--jobs must be at least 1".into()));
        }
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let io = |e: std::io::Error| Error::Domain(format!("cannot write output: {e}"));
    let mut out = Writer::new(&config.output.dir, config.output.format, config.hash()).map_err(io)?;
    let outcome = match name {
        "modes" => commands::modes(&config, &mut out),
        "spectrum" => commands::spectrum(&config, &mut out),
        "sweep" => commands::sweep(&config, &mut out, config.output.svg),
        "aps-kernel" => commands::aps_kernel_cmd(&config, &mut out),
        "mcgowan" => commands::mcgowan(&config, &mut out),
        _ => unreachable!("dispatch covers every run command"),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = out.json("error.json", &error_record(name, &e));
            return Err(e);
        }
    };
    let passed = outcome.passed();
    let report = json!({
        "command": name,
        "version": VERSION,
        "config_sha256": out.config_hash,
        "config": config,
        "seed": args.seed,
        "passed": passed,
        "checks": outcome.checks,
        "failures": outcome.failures,
        "outputs": out.written,
        "details": outcome.details,
    });
    out.json("report.json", &report).map_err(io)?;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &outcome.failures {
        println!("FAIL {f}");
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Modes(a) => ("modes", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Sweep(a) => ("sweep", a),
        Command::ApsKernel(a) => ("aps-kernel", a),
        Command::Mcgowan(a) => ("mcgowan", a),
        Command::Schema => {
            print!("{}", config::SCHEMA);
            return ExitCode::SUCCESS;
        }
        Command::Dodziuk(d) => {
            return match dodziuk_interval(d.lambda, d.eta, d.n, d.p) {
                Ok((lo, hi)) => {
                    println!("[{}, {}]", fmt_num(lo), fmt_num(hi));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprint!("{}", pretty(&error_record("dodziuk", &e)));
                    ExitCode::from(EXIT_ERROR)
                }
            };
        }
    };
    match run(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS),
        Err(e) => {
            eprint!("{}", pretty(&error_record(name, &e)));
            ExitCode::from(EXIT_ERROR)
        }
    }
}
