fn main() {
    std::process::exit(termspan::cli::run(std::env::args_os()));
}
