fn main() {
    std::process::exit(radmax::cli::run(std::env::args_os()));
}
