use std::process::ExitCode;

fn main() -> ExitCode {
    dqvalue_core::cli::run(std::env::args_os())
}
