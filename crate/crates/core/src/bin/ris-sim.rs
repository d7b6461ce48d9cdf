use std::process::ExitCode;

use ris_sim::cli;

fn main() -> ExitCode {
    let result = cli::configure_threads().and_then(|()| cli::run(std::env::args_os()));
    match result {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) if e.code == 0 => {
            print!("{}", e.message);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message.trim_end());
            ExitCode::from(e.code as u8)
        }
    }
}
