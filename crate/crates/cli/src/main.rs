mod args;
mod commands;
mod error;
mod inputs;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

async fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cost(c) => commands::cost(c),
        Command::Validate(c) => commands::validate(c),
        Command::Select(c) => commands::select(c),
        Command::Frontier(c) => commands::frontier(c),
        Command::Whatif(c) => commands::whatif(c),
        Command::Report(c) => commands::report(c),
        Command::Scaling(c) => commands::scaling(c),
        Command::Sweep(c) => commands::sweep(c).await,
        Command::Serve(c) => commands::serve(c).await,
        Command::MockServer(c) => commands::mock_server(c).await,
        Command::ExportFixture(c) => commands::export_fixture(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are validation errors; --help and --version are not.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(2);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
