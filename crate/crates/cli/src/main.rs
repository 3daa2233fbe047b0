use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optovib::{Branch, Mode};

mod commands;
mod config;
mod output;
mod svg;

use commands::CliError;
use config::{ConfigError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "optovib", version, about = "Vibrational spectra of optomechanically coupled atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, mode classification, densities and the potential at one coupling.
    Spectrum,
    /// Spectra over a range of couplings, with thresholds and localized-pair tracks.
    Sweep,
    /// Fractional quasiclassical phase on an (eta, E) lattice.
    Phasemap,
    /// Threshold couplings and energies.
    Thresholds,
    /// Solver self-checks; exits 1 if any fails.
    Validate,
}

#[derive(Args)]
struct Overrides {
    /// JSON config file (flat keys) or a previous run-metadata.json.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long, global = true)]
    branch: Option<Branch>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    x_max: Option<f64>,
    #[arg(long, global = true)]
    n_points: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => config::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        apply!(eta, gamma0, phi, branch, mode, x_max, n_points, out);
        if let Some(f) = self.format {
            cfg.formats = f;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Phasemap => commands::phasemap(&cfg),
        Command::Thresholds => commands::thresholds(&cfg),
        Command::Validate => {
            let report = commands::validate(&cfg)?;
            for c in &report.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {:.3e} (tolerance {:.1e}) {}", c.name, c.metric, c.tolerance, c.detail);
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::ValidationFailed {
                    failed,
                    total: report.checks.len(),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
