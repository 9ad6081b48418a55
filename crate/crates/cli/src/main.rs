//! `phatic`: generate small-talk conversations, render them with guidelines,
//! replay recorded traces and summarize batches.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phatic_core::engine::DEFAULT_STEP_CAP;

mod commands;

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "phatic", version, about = "Generate and analyse rule-based small-talk conversations")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Options for `generate`, which runs when no subcommand is given.
    #[command(flatten)]
    generate: GenerateArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate conversations from consecutive seeds.
    Generate(GenerateArgs),
    /// Re-validate recorded trace-json and render it.
    Replay(ReplayArgs),
    /// Summarize a batch of at least 100 conversations.
    Stats(StatsArgs),
    /// Check a ruleset and bank without running anything.
    Check(CheckArgs),
}

/// Where rules, scenario and text come from. Everything defaults to the
/// shipped data.
#[derive(Debug, Clone, Args)]
struct Inputs {
    /// Scenario JSON. Without --rules, the ruleset is generated from it.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Rule file in the `.phatic` language.
    #[arg(long, value_name = "PATH", env = "PHATIC_RULES")]
    rules: Option<PathBuf>,
    /// Utterance and guideline bank (JSON).
    #[arg(long, value_name = "PATH")]
    bank: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Transcript,
    TraceJson,
    Table,
    Stats,
}

#[derive(Debug, Clone, Args)]
struct GenerateArgs {
    /// First seed; conversation i uses seed + i. Random if omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, value_enum, default_value_t = Format::Transcript)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    step_cap: u64,
    /// Overrides the scenario's turn budget.
    #[arg(long)]
    turn_budget: Option<u32>,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReplayFormat {
    Transcript,
    Table,
}

#[derive(Debug, Clone, Args)]
struct ReplayArgs {
    /// trace-json file with one record per line, or `-` for stdin.
    input: PathBuf,
    /// Seed for choosing text variants. Without it the first variant is used.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReplayFormat::Transcript)]
    format: ReplayFormat,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsFormat {
    Text,
    /// One JSON object.
    #[value(alias = "trace-json")]
    Json,
}

#[derive(Debug, Clone, Args)]
struct StatsArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
    format: StatsFormat,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    step_cap: u64,
    #[arg(long)]
    turn_budget: Option<u32>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Debug, Clone, Args)]
struct CheckArgs {
    /// Also report rules that cannot fire within this many steps of the
    /// scenario's initial state.
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    inputs: Inputs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(CliError::USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        None => commands::generate(&cli.generate),
        Some(Command::Generate(args)) => commands::generate(&args),
        Some(Command::Replay(args)) => commands::replay(&args),
        Some(Command::Stats(args)) => commands::stats(&args),
        Some(Command::Check(args)) => commands::check(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
