fn main() {
    std::process::exit(mpctune::cli::run(std::env::args().collect()));
}
