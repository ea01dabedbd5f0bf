fn main() {
    std::process::exit(tokencom::cli::run(std::env::args_os()));
}
