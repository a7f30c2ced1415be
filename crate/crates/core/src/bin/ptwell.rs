fn main() {
    std::process::exit(ptwell::cli::run(std::env::args_os()));
}
