//! Command-line front end for the cold-collision toolkit: bound spectra,
//! scattering lengths, photoassociation spectra, inner-wall fits, and
//! field-dressed scans, driven by an INI-style configuration file.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "coldscat",
    about = "Cold-collision toolkit: mapped-grid solvers, scattering lengths, photoassociation spectra, dressed-channel scans",
    version
)]
struct Cli {
    /// Configuration file (INI-style sections of key = value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV, plot data, and the checksum manifest
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for scan parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound levels of the ground curve plus the three-way count report
    Bound,
    /// Scattering length per configured isotope and method
    Alen,
    /// Franck-Condon photoassociation spectrum and its nodes
    Fcf,
    /// Fit the ground inner wall to target spectral nodes
    FitWall,
    /// Scattering length versus field intensity
    DressScan,
    /// Scattering length versus resonance-level detuning
    FeshbachScan,
    /// Semiclassical phase integral and level-count estimate
    Phase,
    /// Zero-energy scattering length across the configured isotopes
    Isotopes,
    /// Write an example configuration into the output directory
    ExampleConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("config error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    if matches!(cli.command, Command::ExampleConfig) {
        return match commands::write_example_config(&cli.out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        };
    }

    let Some(config_path) = cli.config.as_ref() else {
        eprintln!("config error: --config <file> is required for this command");
        return ExitCode::from(1);
    };
    let cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Bound => commands::cmd_bound(&cfg, &cli.out),
        Command::Alen => commands::cmd_alen(&cfg, &cli.out),
        Command::Fcf => commands::cmd_fcf(&cfg, &cli.out),
        Command::FitWall => commands::cmd_fit_wall(&cfg, &cli.out),
        Command::DressScan => commands::cmd_dress_scan(&cfg, &cli.out),
        Command::FeshbachScan => commands::cmd_feshbach_scan(&cfg, &cli.out),
        Command::Phase => commands::cmd_phase(&cfg, &cli.out),
        Command::Isotopes => commands::cmd_isotopes(&cfg, &cli.out),
        Command::ExampleConfig => unreachable!(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}");
            eprintln!("error: {msg}");
            if msg.contains("numerical failure") {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
