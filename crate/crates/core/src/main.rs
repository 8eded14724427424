fn main() {
    std::process::exit(xhurst::cli::run(std::env::args_os()));
}
