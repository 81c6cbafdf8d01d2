use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ipdensity_cli::run(std::env::args_os()))
}
