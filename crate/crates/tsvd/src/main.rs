use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tsvd::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let _ = std::io::stderr().write_all(out.stderr.as_bytes());
            if std::io::stdout().write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(tsvd::cli::EXIT_IO);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
