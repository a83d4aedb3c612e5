fn main() {
    std::process::exit(hiersvm::cli::run(std::env::args_os()));
}
