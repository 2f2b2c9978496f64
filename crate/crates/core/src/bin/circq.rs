use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, ValueEnum};

use circq::classify::ClassifyError;
use circq::cli::{self, Format, RunOptions, EXIT_SAMPLING_ERROR, EXIT_SPEC_ERROR};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

/// Classify a 4-manifold with a circulant structure into the W0..W3
/// classes and check the structural identities at sampled points.
#[derive(Debug, Parser)]
#[command(name = "circq", version)]
struct Args {
    /// Manifold spec file (TOML).
    spec: PathBuf,

    /// Number of accepted sample points [default: 50, or [run].points].
    #[arg(long)]
    points: Option<usize>,

    /// RNG seed [default: 0, or [run].seed].
    #[arg(long)]
    seed: Option<u64>,

    /// Residual tolerance [default: 1e-8, or [run].tol].
    #[arg(long)]
    tol: Option<f64>,

    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,

    /// Evaluate the identity suite at every point.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    check_identities: bool,

    /// Worker threads [default: all cores].
    #[arg(long)]
    threads: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };

    let loaded = match cli::load_spec(&args.spec) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {}: {e}", args.spec.display());
            return ExitCode::from(EXIT_SPEC_ERROR as u8);
        }
    };
    let opts = RunOptions {
        points: args.points,
        seed: args.seed,
        tol: args.tol,
        check_identities: args.check_identities,
        threads: args.threads,
    };
    let report = match cli::run(&loaded, &opts) {
        Ok(r) => r,
        Err(ClassifyError::Sampling(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SAMPLING_ERROR as u8);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SPEC_ERROR as u8);
        }
    };
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Machine => Format::Machine,
    };
    let rendered = cli::render(&report, format);
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_SPEC_ERROR as u8);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::SUCCESS
}
