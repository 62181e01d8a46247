use clap::error::ErrorKind;
use clap::Parser;
use tailbound::cli::{dispatch, exit_code, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            std::process::exit(0);
        }
        Err(err) => {
            // one-line diagnostic on the error stream, usage errors exit 1
            let message = err.to_string();
            let first = message.lines().next().unwrap_or("invalid invocation");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            std::process::exit(1);
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.document);
            std::process::exit(outcome.status);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
