use std::process::ExitCode;

use clap::Parser;

use mtdpp_cli::error::{CliError, EXIT_USAGE};
use mtdpp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim_end().to_string()).record());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(&cli) {
        Ok(written) => {
            let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
            println!("{}", serde_json::json!({ "outputs": files }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
