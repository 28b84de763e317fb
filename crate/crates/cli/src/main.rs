use std::io;
use std::process::ExitCode;

use clap::Parser;
use vago_cli::{execute, Cli};

fn main() -> ExitCode {
    // Fixed level: the command takes no configuration from the environment.
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    ExitCode::from(execute(&cli, &mut io::stderr()).code())
}
