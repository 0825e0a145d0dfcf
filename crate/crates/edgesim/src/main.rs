use std::process::ExitCode;

fn main() -> ExitCode {
    edgesim::cli_main()
}
