fn main() {
    std::process::exit(glyphflood::cli::main_with_args(std::env::args_os()));
}
