use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toral_nodal::config::NSpec;
use toral_nodal::output::execute;
use toral_nodal::{CliError, Command, ExperimentConfig};

/// Nodal intersections of toral eigenfunctions with curved arcs.
#[derive(Parser)]
#[command(name = "toral-nodal", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `lo..hi` (half-open), `lo..=hi` or a comma-separated list.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Runs per n.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Output directory [default: config `out`, then $TORAL_NODAL_OUT, then ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write each eigenfunction as JSON under `<out>/eigenfunctions`.
    #[arg(long, global = true)]
    export_eigenfunctions: bool,
    /// Skip the SVG plots.
    #[arg(long, global = true)]
    no_plot: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Lattice-point counts, B_λ and the short-arc audits per n.
    Lattice,
    /// Sign changes and theorem ratios per (n, seed).
    Nodal,
    /// Median shells, Schur norms and the bilinear bound per n.
    Schur,
    /// Several commands over the n-range and seeds, with a summary.
    Sweep,
    /// Geodesic and spherical counterexamples.
    Exceptions,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let command = match cli.command {
        Cmd::Lattice => Command::Lattice,
        Cmd::Nodal => Command::Nodal,
        Cmd::Schur => Command::Schur,
        Cmd::Sweep => Command::Sweep,
        Cmd::Exceptions => Command::Exceptions,
    };
    if let Some(c) = cfg.command {
        if c != command {
            eprintln!("note: config names command {}, running {}", c.name(), command.name());
        }
    }
    cfg.command = Some(command);
    if let Some(n) = &cli.n {
        cfg.n = NSpec::parse(n)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.seeds {
        cfg.seeds = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    cfg.export_eigenfunctions |= cli.export_eigenfunctions;
    cfg.plot &= !cli.no_plot;
    cfg.validate()?;
    let out = cli
        .out
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os("TORAL_NODAL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let w = execute(command, &cfg, &out)?;
    Ok(format!("{} rows -> {}", w.rows, w.jsonl.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
