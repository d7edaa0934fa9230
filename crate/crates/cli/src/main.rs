use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = sepprob_cli::Cli::parse();
    let stdout = std::io::stdout();
    let code = sepprob_cli::run(cli, &mut stdout.lock());
    ExitCode::from(code)
}
