mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Outcome, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "copodual", version, about = "Regularized duals for linear copositive programs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Unset flags fall back to the defaults
/// listed in `commands::DEFAULTS`.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Simplex grid resolution k
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Main tolerance of the subcommand's verdict
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Initial restriction radius (default: four grid cell diameters)
    #[arg(long, global = true)]
    pub eps_init: Option<f64>,
    /// Iteration cap of the level loop
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Print the JSON report instead of the human rendering
    #[arg(long, global = true)]
    pub json: bool,
    /// Output file (solution for build-dual and sdp-convert, report otherwise)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide copositivity of a symmetric matrix
    CheckCop { matrix: PathBuf },
    /// Detect immobile indices level by level
    FindImmobile { program: PathBuf },
    /// Construct the extended dual and report on strong duality
    BuildDual { program: PathBuf },
    /// Check a primal point against a stored dual solution
    Verify {
        program: PathBuf,
        /// File written by `build-dual --out`
        dual: PathBuf,
        /// Primal point as a JSON array, overriding the stored x0
        #[arg(long)]
        x: Option<String>,
    },
    /// Convert a full-form SDP dual to the reduced form
    SdpConvert { program: PathBuf, ed: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let c = &cli.common;
    let outcome = match &cli.command {
        Command::CheckCop { matrix } => commands::check_cop(matrix, c),
        Command::FindImmobile { program } => commands::find_immobile(program, c),
        Command::BuildDual { program } => commands::build_dual(program, c),
        Command::Verify { program, dual, x } => commands::verify(program, dual, x.as_deref(), c),
        Command::SdpConvert { program, ed } => commands::sdp_convert(program, ed, c),
    };
    emit(outcome, c)
}

fn emit(outcome: Outcome, c: &Common) -> ExitCode {
    let code = outcome.code;
    if let Some((path, body)) = &outcome.file {
        if let Err(e) = std::fs::write(path, body) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    if c.json {
        println!("{}", outcome.json());
    } else {
        let text = render::human(&outcome.report);
        if code == EXIT_USAGE || outcome.report.get("error").is_some() {
            eprint!("{text}");
        } else {
            print!("{text}");
        }
    }
    ExitCode::from(code)
}
