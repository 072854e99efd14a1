fn main() {
    std::process::exit(cayley_toeplitz::cli::main_with_args(std::env::args_os()));
}
