fn main() {
    std::process::exit(haarmoment::cli::main_with_args(std::env::args_os()));
}
