fn main() {
    std::process::exit(cuspform::cli::run(std::env::args_os()));
}
