fn main() {
    std::process::exit(sequentinel::cli::run());
}
