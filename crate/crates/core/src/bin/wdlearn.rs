use std::process::ExitCode;

fn main() -> ExitCode {
    wdlearn::cli::main_with_args()
}
