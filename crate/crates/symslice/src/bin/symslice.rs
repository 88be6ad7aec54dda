fn main() {
    std::process::exit(symslice::cli::main_with_args(std::env::args_os()));
}
