//! `adsmax`: run experiments, summarize their manifests, check surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod manifest;
mod report;
mod run;

use clap::{Parser, Subcommand};
use error::{CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "adsmax", version, about = "Maximal surfaces along rays of quadratic differentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Single-threaded reference mode.
        #[arg(long)]
        deterministic: bool,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the claim table of a finished run.
    Report { dir: PathBuf },
    /// Build the configured surface and print its invariant checks.
    ValidateSurface { config: PathBuf },
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Run {
            config,
            deterministic,
            out,
        } => {
            let started = std::time::Instant::now();
            let outcome = run::run(&config, &run::RunOptions { deterministic, out })?;
            print!("{}", report::render(&outcome.manifest));
            eprintln!(
                "wrote {} in {:.2?}",
                outcome.out_dir.display(),
                started.elapsed()
            );
            Ok(outcome.manifest.all_pass)
        }
        Command::Report { dir } => {
            let m = manifest::read_manifest(&dir)?;
            print!("{}", report::render(&m));
            Ok(m.all_pass)
        }
        Command::ValidateSurface { config } => {
            let loaded = config::load(&config)?;
            let Some(surface) = run::with_pool(false, |_| run::build_configured_surface(&loaded.config))?? else {
                return Err(CliError::Config("config has no surface section".into()));
            };
            let r = adsmax_core::surface::validate_surface(&surface);
            println!(
                "{:?} level {}: {} vertices, {} faces",
                surface.kind,
                surface.subdivision_level,
                surface.vertex_count(),
                surface.mesh.faces.len()
            );
            for c in &r.checks {
                println!(
                    "{}: {}  measured {:.6e}  tolerance {:.1e}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.measured,
                    c.tolerance
                );
            }
            Ok(r.all_pass())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
