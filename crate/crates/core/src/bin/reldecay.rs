fn main() {
    std::process::exit(reldecay::cli::run(std::env::args_os()));
}
