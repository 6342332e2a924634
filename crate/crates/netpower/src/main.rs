fn main() {
    std::process::exit(netpower::cli::run(std::env::args_os()));
}
