use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use psent_cli::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = psent_cli::run(&cli.command);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(outcome.stdout.as_bytes());
    if let Some(msg) = &outcome.diagnostic {
        eprintln!("psent {}: {msg}", cli.command.name());
    }
    ExitCode::from(outcome.code as u8)
}
