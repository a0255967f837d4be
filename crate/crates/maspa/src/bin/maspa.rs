fn main() {
    std::process::exit(maspa::cli::run(std::env::args()));
}
