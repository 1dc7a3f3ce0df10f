use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdwave::cli::{self, CliCommand, RunManifest};

#[derive(Parser)]
#[command(
    name = "sdwave",
    about = "Strongly damped wave equation: direct solves, source identification, \
             periodic-solution construction, and smallness diagnostics"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (TOML)
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Output directory for CSV, summary, and plots
    #[arg(long, short = 'o', default_value = "out")]
    out: PathBuf,
    /// Dotted-path config overrides, e.g. --set solver.dt=0.0005
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write SVG plots of g(t), r(t), and the energy series
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing assumptions on sampled grids
    Validate(CommonArgs),
    /// Integrate the reduced problem from given initial data
    SolveIvp(CommonArgs),
    /// Integrate and report the reconstructed source factor g(t)
    Identify(CommonArgs),
    /// Whole-line sweep and periodicity verification
    FindPeriodic(CommonArgs),
    /// Evaluate the sufficient smallness conditions with margins
    CheckSmallness(CommonArgs),
    /// Verify the solver against a manufactured exact solution
    MmsVerify(CommonArgs),
    /// Scan shift candidates and measure almost-period defects
    AlmostPeriodScan(CommonArgs),
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, common) = match args.command {
        Command::Validate(c) => (CliCommand::Validate, c),
        Command::SolveIvp(c) => (CliCommand::SolveIvp, c),
        Command::Identify(c) => (CliCommand::Identify, c),
        Command::FindPeriodic(c) => (CliCommand::FindPeriodic, c),
        Command::CheckSmallness(c) => (CliCommand::CheckSmallness, c),
        Command::MmsVerify(c) => (CliCommand::MmsVerify, c),
        Command::AlmostPeriodScan(c) => (CliCommand::AlmostPeriodScan, c),
    };
    let manifest = RunManifest {
        command,
        config_path: common.config,
        output_dir: common.out,
        overrides: common.set,
        plot: common.plot,
    };
    match cli::run(&manifest) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
