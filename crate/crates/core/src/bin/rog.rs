fn main() {
    std::process::exit(rog::cli::run(std::env::args_os()));
}
