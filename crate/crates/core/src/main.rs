fn main() {
    std::process::exit(factor_matching::cli::main_with(std::env::args_os()));
}
