fn main() {
    std::process::exit(nnlab::cli::run(std::env::args_os()));
}
