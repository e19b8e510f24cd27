use std::io::{self, Write};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use lapqbe_cli::{run, Cli, CAP_ENV};

const USAGE_EXIT: u8 = 2;

fn print_usage() {
    eprintln!("\n{}", Cli::command().render_usage());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // --help and --version go to stdout and exit 0.
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            print_usage();
            return ExitCode::from(USAGE_EXIT);
        }
    };
    let env_cap = std::env::var(CAP_ENV).ok();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, env_cap.as_deref(), &mut out);
    let _ = out.flush();
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("lapqbe: {e}");
            if e.exit_code() == USAGE_EXIT {
                print_usage();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
