fn main() {
    std::process::exit(bthreads::cli::main_with_args(std::env::args_os()));
}
