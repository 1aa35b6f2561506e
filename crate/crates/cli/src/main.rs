//! `stratray`: ray fans, spreading, caustics, beams and identity checks for
//! depth-stratified sound-speed profiles.

mod commands;
mod scenario;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "stratray", version, about = "Ray and paraxial beam tracing in stratified media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub(crate) struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub(crate) scenario: PathBuf,
    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub(crate) threads: Option<usize>,
    /// Timestamp recorded in `run.json`; no wall-clock time is written otherwise.
    #[arg(long)]
    pub(crate) timestamp: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the fan: one CSV per ray plus `fan.svg`.
    Trace(Common),
    /// Trace with spreading columns q, p, ain, ain_dot.
    Spread(Common),
    /// Caustic events per ray and observed vs predicted spacing.
    Caustics(Common),
    /// Gaussian beam field at the scenario offsets.
    Beam(Common),
    /// Convergence-zone half-wavelength at the source depth.
    Czdist {
        #[command(flatten)]
        common: Common,
        /// Depth to evaluate instead of the source depth [m].
        #[arg(long)]
        depth: Option<f64>,
    },
    /// Run the identity suite and write `report.json`; exit 1 on any failure.
    Validate(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Trace(c) => commands::Context::new(c).and_then(|ctx| ctx.trace()),
        Command::Spread(c) => commands::Context::new(c).and_then(|ctx| ctx.spread()),
        Command::Caustics(c) => commands::Context::new(c).and_then(|ctx| ctx.caustics()),
        Command::Beam(c) => commands::Context::new(c).and_then(|ctx| ctx.beam()),
        Command::Czdist { common, depth } => commands::Context::new(common).and_then(|ctx| ctx.czdist(*depth)),
        Command::Validate(c) => commands::Context::new(c).and_then(|ctx| ctx.validate()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
