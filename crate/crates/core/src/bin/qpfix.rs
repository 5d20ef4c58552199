fn main() {
    std::process::exit(qpfix::cli::run(std::env::args_os()));
}
