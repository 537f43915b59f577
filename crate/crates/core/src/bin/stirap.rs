fn main() {
    std::process::exit(stirap_gates::cli::main_with_args(std::env::args_os()));
}
