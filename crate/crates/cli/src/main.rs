//! `lsl`: liquid Lane-Emden star equilibria, growing modes, scaling sweeps and
//! free-boundary evolution from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    EscapeArgs, EvolveArgs, GaseousArgs, LinearArgs, ModesArgs, RayleighArgs, ScalingArgs,
    SteadyArgs, VerifyArgs,
};
use config::{load_config, CliError, OutputRoot};

#[derive(Debug, Parser)]
#[command(
    name = "lsl",
    version,
    about = "Liquid Lane-Emden stars: equilibria, growing modes and evolution"
)]
struct Cli {
    /// JSON object of parameters for the subcommand; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps and escape runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Root for relative output paths.
    #[arg(long, global = true, env = "LSL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve a liquid star and write its profile.
    Steady(SteadyArgs),
    /// Solve the gaseous reference star with unit central density.
    Gaseous(GaseousArgs),
    /// Lowest eigenmode of the linearized problem.
    Modes(ModesArgs),
    /// Rayleigh quotients of trial functions.
    Rayleigh(RayleighArgs),
    /// Sweep the central density and check the predicted scaling.
    Scaling(ScalingArgs),
    /// Nonlinear evolution of the equilibrium or a seeded mode.
    Evolve(EvolveArgs),
    /// Evolution of the linearized system from an eigenmode.
    Linear(LinearArgs),
    /// Escape times of seeded modes against the seed size.
    Escape(EscapeArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(load_config).transpose()?;
    let file = file.as_ref();
    let out = OutputRoot(cli.out_dir);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(config::config_error("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Cmd::Steady(a) => commands::steady(a, file, &out),
        Cmd::Gaseous(a) => commands::gaseous(a, file, &out),
        Cmd::Modes(a) => commands::modes(a, file, &out),
        Cmd::Rayleigh(a) => commands::rayleigh(a, file, &out),
        Cmd::Scaling(a) => commands::scaling(a, file, &out),
        Cmd::Evolve(a) => commands::evolve(a, file, &out),
        Cmd::Linear(a) => commands::linear(a, file, &out),
        Cmd::Escape(a) => commands::escape(a, file, &out),
        Cmd::Verify(a) => commands::verify(a, file, &out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
