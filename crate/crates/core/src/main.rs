fn main() {
    std::process::exit(approbust::cli::main_with_args(std::env::args_os()));
}
