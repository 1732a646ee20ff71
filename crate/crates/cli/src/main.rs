use clap::Parser;

use omm_cli::commands::{dispatch, Command};

/// Online maximum-margin classification: preprocessing, experiments, bounds
/// and invariant checks.
#[derive(Debug, Parser)]
#[command(name = "omm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
