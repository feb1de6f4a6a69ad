fn main() {
    std::process::exit(ddbounds::cli::run(std::env::args_os()));
}
