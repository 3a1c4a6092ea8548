//! `chordflow`: propagate semiclassical Wigner functions, compare the
//! transport engines against the exact quantum oracle, trace Wigner
//! caustics, and run the quartic closed-form benchmark.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CmdError;
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "chordflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tips-of-the-chord propagation report and propagated field
    Propagate(CommonArgs),
    /// Side-by-side engine fields and error metrics against the oracle
    Compare(CommonArgs),
    /// Wigner-caustic trace and chord-count raster
    CausticMap(CommonArgs),
    /// Closed-form-vs-numeric quartic suite and cubic scaling probe
    QuarticBench(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration file (key = value with [section] headers)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: CHORDFLOW_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Propagate(a) => ("propagate", a),
        Command::Compare(a) => ("compare", a),
        Command::CausticMap(a) => ("caustic-map", a),
        Command::QuarticBench(a) => ("quartic-bench", a),
    };

    let threads = args
        .threads
        .or_else(|| {
            std::env::var("CHORDFLOW_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    if rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_err()
    {
        // pool already installed (tests); proceed with the existing one
    }

    let start = std::time::Instant::now();
    let (mut cfg, config_text) = match config::load_config(&args.config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("chordflow {name}: config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }

    let mut manifest = Manifest::new(name, &config_text, threads);
    let result = match &cli.command {
        Command::Propagate(_) => commands::cmd_propagate(&cfg, &mut manifest),
        Command::Compare(_) => commands::cmd_compare(&cfg, &mut manifest),
        Command::CausticMap(_) => commands::cmd_caustic_map(&cfg, &mut manifest),
        Command::QuarticBench(_) => commands::cmd_quartic_bench(&cfg, &mut manifest),
    };
    manifest.elapsed_s = start.elapsed().as_secs_f64();

    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            manifest.status = match e {
                CmdError::Config(_) => "config-error",
                CmdError::Numerical(_) => "numerical-failure",
                CmdError::Acceptance(_) => "acceptance-failure",
            }
            .to_string();
            manifest.failure_site = Some(e.message().to_string());
            eprintln!("chordflow {name}: {}", e.message());
            e.exit_code()
        }
    };
    if let Err(e) = manifest.write(&cfg.out_dir) {
        eprintln!("chordflow {name}: cannot write manifest: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
