//! `gmtk`: batch front end. Each subcommand reads a JSON config, runs one
//! pipeline and writes its artifacts to the output directory.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;
use crate::output::{Format, Out};

#[derive(Parser)]
#[command(name = "gmtk", version, about = "Plane rotations, cube maps, deformations, varifolds and discrete spanning problems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// JSON config; unknown keys are rejected. Top-level scalars can be
    /// overridden with GMTK_<KEY>.
    #[arg(long, global = true, env = "GMTK_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for every random choice of the command.
    #[arg(long, global = true, env = "GMTK_SEED")]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, env = "GMTK_OUT", default_value = "gmtk-out")]
    out: PathBuf,
    /// Format of the main table.
    #[arg(long, global = true, env = "GMTK_FORMAT", value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation paths between plane pairs read from a CSV file.
    Rotate { planes: PathBuf },
    /// Smooth cube retraction on random probes.
    Retract,
    /// Central projection onto a convex body.
    Project,
    /// Whitney family of an open region.
    Whitney,
    /// Deformation of a sampled set onto the m-skeleton of a cube grid.
    Deform { set: PathBuf },
    /// Slices of a sampled disc by the distance to its centre.
    Slice,
    /// Annealed minimizer of a spanning problem.
    Minimize { problem: PathBuf },
    /// Density-ratio audit of a stored solution.
    Audit { solution: PathBuf },
    /// Ellipticity margin of an integrand at a plane.
    ProbeEllipticity,
}

pub struct Ctx {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Format,
    pub out: Out,
}

fn run(cli: Cli) -> CliResult<Ctx> {
    let g = cli.global;
    let mut ctx = Ctx {
        config: g.config,
        seed: g.seed,
        format: g.format,
        out: Out::new(&g.out)?,
    };
    match cli.command {
        Command::Rotate { planes } => commands::rotate::run(&mut ctx, &planes)?,
        Command::Retract => commands::retract::run(&mut ctx)?,
        Command::Project => commands::project::run(&mut ctx)?,
        Command::Whitney => commands::whitney::run(&mut ctx)?,
        Command::Deform { set } => commands::deform::run(&mut ctx, &set)?,
        Command::Slice => commands::slice::run(&mut ctx)?,
        Command::Minimize { problem } => commands::minimize::run(&mut ctx, &problem)?,
        Command::Audit { solution } => commands::audit::run(&mut ctx, &solution)?,
        Command::ProbeEllipticity => commands::probe::run(&mut ctx)?,
    }
    Ok(ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(ctx) => {
            for p in &ctx.out.written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
