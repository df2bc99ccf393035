fn main() {
    std::process::exit(pipa::cli::run());
}
