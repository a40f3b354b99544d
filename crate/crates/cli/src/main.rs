fn main() {
    std::process::exit(polysle_cli::run(std::env::args_os()));
}
