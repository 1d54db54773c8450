//! `rgdms`: checks, dimension estimates and the three-vertex example.
//!
//! Exit codes: 0 success, 1 bad input, 2 a check or assertion failed,
//! 3 a check was inconclusive, 4 the pressure zero could not be bracketed.

mod manifest;
mod pipeline;

use clap::{Parser, Subcommand};
use manifest::RunArgs;
use pipeline::Exit;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "rgdms", version, about = "Julia sets and Bowen dimension of rational graph-directed Markov systems")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the hypothesis checks and write a consolidated report.
    Check(RunArgs),
    /// Estimate the dimension: cloud, periodic points, pressure, zero.
    Dim(RunArgs),
    /// Reproduce the three-vertex example with parameter N (N >= 5).
    Example {
        n: usize,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Repeat a run from the manifest.json it wrote.
    Replay {
        manifest: std::path::PathBuf,
        /// Write to this directory instead of the recorded one.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return if e.use_stderr() { ExitCode::from(Exit::Usage as u8) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("rgdms: cannot set thread count: {e}");
            return ExitCode::from(Exit::Usage as u8);
        }
    }
    let outcome = match &cli.command {
        Command::Check(a) => pipeline::cmd_check(a, cli.threads),
        Command::Dim(a) => pipeline::cmd_dim(a, cli.threads),
        Command::Example { n, args } => pipeline::cmd_example(*n, args, cli.threads),
        Command::Replay { manifest, out } => replay(manifest, out.as_deref(), cli.threads),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("rgdms: {msg}");
            ExitCode::from(Exit::Usage as u8)
        }
    }
}

fn replay(path: &std::path::Path, out: Option<&std::path::Path>, threads: Option<usize>) -> pipeline::Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let m: manifest::RunManifest =
        serde_json::from_str(&text).map_err(|e| format!("{}: not a run manifest: {e}", path.display()))?;
    let mut args = m.to_args();
    if let Some(o) = out {
        args.out = o.to_path_buf();
    }
    match m.command.split_once(' ') {
        _ if m.command == "check" => pipeline::cmd_check(&args, threads),
        _ if m.command == "dim" => pipeline::cmd_dim(&args, threads),
        Some(("example", n)) => {
            let n = n.parse().map_err(|_| format!("bad example parameter '{n}'"))?;
            pipeline::cmd_example(n, &args, threads)
        }
        _ => Err(format!("unknown command '{}' in manifest", m.command)),
    }
}
