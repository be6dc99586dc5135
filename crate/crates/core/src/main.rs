fn main() {
    std::process::exit(hyperqual::cli::main_with(std::env::args_os()));
}
