fn main() {
    std::process::exit(rigidity_forge::cli::main_with_args(std::env::args_os()));
}
