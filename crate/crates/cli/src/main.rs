use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(schemaforge_cli::run(std::env::args_os()).code())
}
