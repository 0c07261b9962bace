//! `fermicav`: steady-state transport of a two-band chain coupled to a lossy
//! cavity, by four methods sharing one configuration format.
//!
//! Single runs (`ngf`, `qme-full`, `qme-eff`, `rates`) write
//! `<method>_summary.json` plus spectra files into `--out`. `sweep` maps one
//! or two parameters per the `[sweep]` config table into a long-format CSV;
//! `compare` cross-checks summary files from different methods at identical
//! parameters. The pipeline is deterministic end to end: rerunning any
//! command byte-reproduces its outputs.

mod compare;
mod config;
mod output;
mod runner;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use runner::Method;

#[derive(Parser)]
#[command(name = "fermicav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Self-consistent frequency-domain solver (full spectra)
    Ngf(RunArgs),
    /// Master equation on the chain + photon Fock space
    QmeFull(RunArgs),
    /// Electron-only master equation with the cavity integrated out
    QmeEff(RunArgs),
    /// Factorized rate equations and their perturbative expansion
    Rates(RunArgs),
    /// Product-grid parameter sweep per the [sweep] config table
    Sweep(SweepArgs),
    /// Cross-method comparison of summary JSON files
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Concurrent sweep points; 0 uses every core
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more *_summary.json files from different methods
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ngf(a) => run_single(Method::Ngf, &a),
        Command::QmeFull(a) => run_single(Method::QmeFull, &a),
        Command::QmeEff(a) => run_single(Method::QmeEff, &a),
        Command::Rates(a) => run_single(Method::Rates, &a),
        Command::Sweep(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let report = sweep::run(&cfg, &a.out, a.workers)?;
            println!(
                "sweep: {} rows ({} failed) -> {}",
                report.rows,
                report.failures,
                report.csv_path.display()
            );
            Ok(())
        }
        Command::Compare(a) => {
            let report = compare::run(&a.inputs, &a.out)?;
            for m in &report.methods {
                let flag = if m.in_domain { "" } else { "  [out of domain]" };
                println!(
                    "{:<9} J = {:.6e}  deltaJ = {:+.6e}{}",
                    m.method, m.j, m.delta_j, flag
                );
            }
            println!(
                "max pairwise deviation: J {:.3e}, deltaJ {:.3e}",
                report.max_dev_j, report.max_dev_delta_j
            );
            Ok(())
        }
    }
}

fn run_single(method: Method, args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let out = runner::run(method, &cfg)?;
    let path = output::write_run(&args.out, method, &out)?;
    let r = &out.record;
    println!(
        "{}: J/(e gamma1) = {:.6e}, deltaJ = {:+.6e} ({} iterations) -> {}",
        method.name(),
        r.j,
        r.delta_j,
        r.iterations,
        path.display()
    );
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
