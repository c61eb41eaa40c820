use std::process::ExitCode;

fn main() -> ExitCode {
    twoheads::cli::run(std::env::args_os())
}
