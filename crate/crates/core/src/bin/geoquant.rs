use std::process::exit;

use clap::error::ErrorKind;
use clap::Parser;

use geoquant::cli::{self, Cli, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            exit(0);
        }
        Err(e) => {
            eprintln!("{e}");
            exit(EXIT_USAGE);
        }
    };
    match cli::run(cli) {
        Ok(code) => exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            exit(EXIT_USAGE);
        }
    }
}
