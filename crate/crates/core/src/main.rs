fn main() {
    std::process::exit(cuspwave::cli::run_from(std::env::args_os()));
}
