fn main() {
    std::process::exit(polydisk_cli::run_cli(std::env::args_os()));
}
