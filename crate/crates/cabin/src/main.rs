fn main() {
    std::process::exit(cabin::cli::run());
}
