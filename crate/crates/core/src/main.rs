fn main() {
    std::process::exit(phirt::cli::run(std::env::args_os()));
}
