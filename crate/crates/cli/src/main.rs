fn main() {
    std::process::exit(ribe_cli::run(std::env::args_os()));
}
