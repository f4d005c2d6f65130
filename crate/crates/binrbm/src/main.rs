fn main() {
    std::process::exit(binrbm::cli::run(std::env::args_os()));
}
