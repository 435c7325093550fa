use std::process::ExitCode;

use clap::Parser;
use dqd_repeater::runner::{exit_code, from_cli, run, Cli, EXIT_USAGE};

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return code(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = from_cli(&cli).and_then(|config| run(&config));
    match result {
        Ok((record, _)) => {
            if !record.passed() {
                eprintln!("error: {} check failed", record.config.command);
            }
            code(record.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            code(exit_code(&e))
        }
    }
}
