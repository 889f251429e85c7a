fn main() {
    std::process::exit(triop_cli::run(std::env::args_os()));
}
