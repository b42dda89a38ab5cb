fn main() {
    std::process::exit(wkit::cli::run_command(std::env::args_os()));
}
