use std::process::ExitCode;

fn main() -> ExitCode {
    fkdv::cli::main_with_args(std::env::args_os())
}
