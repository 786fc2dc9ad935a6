fn main() {
    std::process::exit(bosonic_moments::cli::run(std::env::args_os()));
}
