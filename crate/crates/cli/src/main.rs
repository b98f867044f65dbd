use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(kickrotor_cli::run(std::env::args_os()))
}
