fn main() {
    std::process::exit(zoaudit::cli::main_with_args(std::env::args_os()));
}
