fn main() {
    std::process::exit(msplot::cli::run(std::env::args_os()));
}
