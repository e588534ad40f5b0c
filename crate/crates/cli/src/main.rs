fn main() {
    std::process::exit(qbench_cli::cli::run_cli(std::env::args_os()));
}
