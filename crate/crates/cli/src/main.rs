fn main() {
    std::process::exit(reldiv_cli::run(std::env::args_os()));
}
