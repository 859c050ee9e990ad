fn main() {
    std::process::exit(bcs_landscape::cli::main_with_args(std::env::args_os()));
}
