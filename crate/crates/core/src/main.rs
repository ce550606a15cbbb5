fn main() {
    std::process::exit(chowring::cli::run(std::env::args_os()));
}
