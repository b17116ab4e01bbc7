use std::path::PathBuf;
use std::process::ExitCode;

use bachlike_core::regime::classify_regime;
use bachlike_verify::{run_grid, run_suite, Manifest, Overrides, Report};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bachlike",
    version,
    about = "Curvature identity verifier for 4-d gradient shrinking Ricci solitons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suites of a manifest.
    Suite {
        manifest: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Classify one (α, β) pair.
    #[command(allow_negative_numbers = true)]
    Classify { alpha: f64, beta: f64 },
    /// Classify the (α, β) lattice of a manifest.
    Grid {
        manifest: PathBuf,
        #[arg(long, env = "BACHLIKE_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Flags {
    #[arg(long, env = "BACHLIKE_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "BACHLIKE_JET_ORDER")]
    jet_order: Option<usize>,
    /// Gauss–Legendre nodes per axis.
    #[arg(long, env = "BACHLIKE_QUADRATURE")]
    quadrature: Option<usize>,
    /// Pointwise tolerance for every identity.
    #[arg(long, env = "BACHLIKE_TOLERANCE")]
    tolerance: Option<f64>,
    #[arg(long, env = "BACHLIKE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "BACHLIKE_THREADS")]
    threads: Option<usize>,
}

fn emit(report: &Report, out: Option<&PathBuf>) -> bachlike_verify::Result<()> {
    match out {
        Some(path) => {
            report.write(path)?;
            print!("{}", report.table());
        }
        None => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn execute(cli: Cli) -> bachlike_verify::Result<u8> {
    match cli.command {
        Command::Suite { manifest, flags } => {
            let mut m = Manifest::load(&manifest)?;
            m.apply(&Overrides {
                seed: flags.seed,
                jet_order: flags.jet_order,
                quadrature: flags.quadrature,
                tolerance: flags.tolerance,
                out: flags.out,
                threads: flags.threads,
            });
            let report = run_suite(&m)?;
            emit(&report, m.output.path.as_ref())?;
            Ok(report.exit_code() as u8)
        }
        Command::Classify { alpha, beta } => {
            println!(
                "{}",
                serde_json::to_string_pretty(&classify_regime(alpha, beta))?
            );
            Ok(0)
        }
        Command::Grid { manifest, out } => {
            let mut m = Manifest::load(&manifest)?;
            m.apply(&Overrides {
                out,
                ..Default::default()
            });
            let report = run_grid(&m)?;
            match m.output.path.as_ref() {
                Some(path) => report.write(path)?,
                None => print!("{}", report.to_json()?),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
