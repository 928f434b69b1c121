fn main() {
    std::process::exit(qso::cli::main_with_args(std::env::args_os()));
}
