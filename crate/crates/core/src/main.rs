fn main() {
    std::process::exit(starkit::cli::main_from_env());
}
