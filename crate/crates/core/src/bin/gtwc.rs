use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match gtwc::cli::Cli::try_parse() {
        Ok(cli) => gtwc::cli::run(cli),
        Err(e) => {
            // usage errors share the invalid-input code; 2 is reserved for capped runs
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
