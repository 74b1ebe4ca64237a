use std::process::ExitCode;

fn main() -> ExitCode {
    cablefield::cli::main_with_args(std::env::args_os())
}
