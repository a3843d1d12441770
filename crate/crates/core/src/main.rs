use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use morph::commands::{
    cmd_design_check, cmd_feasibility, cmd_model_sweep, cmd_simulate, exit_code_for,
    CommandOutput, Formats,
};
use morph::config::RunConfig;
use morph::Result;

#[derive(Parser)]
#[command(name = "morph", version, about = "Passive variable-radius wheel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated output formats: csv, json, svg
    #[arg(long, default_value = "csv,json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Torque and force curves over the contraction stroke
    ModelSweep(CommonArgs),
    /// Wheel-weight feasibility region and friction requirements
    Feasibility(CommonArgs),
    /// Static constraint and segment vibration checks
    DesignCheck(CommonArgs),
    /// Locomotion scenarios: load sweeps, comparisons, reversal
    Simulate(CommonArgs),
}

fn load_config(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse_str(&text)
}

fn run(cli: Cli) -> Result<CommandOutput> {
    let (args, runner): (&CommonArgs, fn(&RunConfig, &std::path::Path, Formats) -> Result<CommandOutput>) =
        match &cli.command {
            Command::ModelSweep(a) => (a, cmd_model_sweep),
            Command::Feasibility(a) => (a, cmd_feasibility),
            Command::DesignCheck(a) => (a, cmd_design_check),
            Command::Simulate(a) => (a, cmd_simulate),
        };
    let formats = Formats::parse(&args.format)?;
    let config = load_config(&args.config)?;
    runner(&config, &args.out, formats)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            for file in &output.files {
                println!("wrote {}", file.display());
            }
            if output.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in &output.violations {
                    eprintln!("violation: {v}");
                }
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
