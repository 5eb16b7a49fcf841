fn main() {
    std::process::exit(symclust::cli::main_with_args(std::env::args_os()));
}
