fn main() {
    std::process::exit(hsflow_cli::run_command(std::env::args_os()));
}
