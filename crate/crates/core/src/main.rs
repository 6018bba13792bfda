fn main() {
    std::process::exit(wellscape::cli::main_with_args(std::env::args_os()));
}
