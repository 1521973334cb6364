//! `socialsim`: validate scenarios, run headless sessions, replay and
//! inspect event logs.

mod commands;
mod style;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0  success (valid scenario, finished run, identical replay)
  1  scenario has errors (validate, run) or the replay diverged
  2  usage error, unreadable input, malformed or truncated log
  3  the player script ran out while a prompt was pending

Set SOCIALSIM_NO_COLOR to disable colored output.";

#[derive(Debug, Parser)]
#[command(name = "socialsim", version, about = "Deterministic social simulation for NPCs", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and print its diagnostics as `file:line:col code message`.
    Validate { file: PathBuf },
    /// Run a headless session and write its event log.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        ticks: u64,
        /// Player answers, one per line: Accept, Neutral or Reject.
        #[arg(long, conflicts_with = "interactive")]
        player_script: Option<PathBuf>,
        /// Answer player prompts from the terminal.
        #[arg(long)]
        interactive: bool,
        /// Write the log here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a readable trace with every NPC's desires to standard error.
        #[arg(long)]
        debug: bool,
    },
    /// Regenerate a log from its scenario, seed and player inputs and compare.
    Replay { file: PathBuf, log: PathBuf },
    /// Rebuild the final state of a log and answer a query about it.
    #[command(after_help = commands::INSPECT_USAGE)]
    Inspect {
        file: PathBuf,
        log: PathBuf,
        #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
        query: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Run { file, seed, ticks, player_script, interactive, out, debug } => commands::run(
            &commands::RunConfig { scenario: file, seed, ticks, player_script, interactive, out, debug },
        ),
        Command::Replay { file, log } => commands::replay(&file, &log),
        Command::Inspect { file, log, query } => commands::inspect(&file, &log, &query),
    };
    ExitCode::from(code)
}
