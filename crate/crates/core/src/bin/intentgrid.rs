fn main() {
    std::process::exit(intentgrid::cli::run_cli(std::env::args_os()));
}
