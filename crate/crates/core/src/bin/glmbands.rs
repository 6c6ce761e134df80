fn main() {
    std::process::exit(glmbands::cli::run(std::env::args_os()));
}
