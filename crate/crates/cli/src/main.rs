fn main() {
    std::process::exit(indepbound_cli::run(std::env::args_os()));
}
